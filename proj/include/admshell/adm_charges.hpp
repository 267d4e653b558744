#ifndef ADMSHELL_ADM_CHARGES_HPP
#define ADMSHELL_ADM_CHARGES_HPP

#include <optional>
#include <string>
#include <vector>

#include "admshell/initial_data.hpp"

namespace admshell {

// Flux integrals over the Euclidean sphere |x| = rho (area measure dsigma_0).
double adm_energy(const InitialData& data, double rho, const GridPtr& grid);
Vec3 adm_linear_momentum(const InitialData& data, double rho, const GridPtr& grid);
// J_i = 1/(8 pi E) int pi_jk (Y_i)^j n_k; pass E = 1 for the raw flux.
Vec3 adm_angular_momentum(const InitialData& data, double rho, double E, const GridPtr& grid);
Vec3 adm_center_of_mass(const InitialData& data, double rho, double E, const GridPtr& grid);

// Richardson elimination on a geometric radius ladder, leading error c/rho^e.
RichardsonResult extrapolate_charges(const std::vector<double>& rho, const std::vector<double>& val,
                                     double exponent = 1.0);

struct ChargeSet {
  double E = 0.0;
  Vec3 P{}, J{}, C{};
  std::vector<double> radii;
  double err_E = 0.0, err_P = 0.0, err_J = 0.0, err_C = 0.0;
  bool normalized_by_E = true;
  bool JC_valid = false;  // E > 0 is required before J and C are reported

  std::string to_json() const;
};

// Evaluate all four charges on the radius ladder and extrapolate.
// If normalize_by_E is false, J and C carry the raw 1/8pi and 1/16pi fluxes
// without the 1/E factor.
ChargeSet charge_set(const InitialData& data, const std::vector<double>& radii, const GridPtr& grid,
                     bool normalize_by_E = true);

}  // namespace admshell

#endif
