#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latvib/hubbard_params.hpp"
#include "latvib/units.hpp"

namespace latvib {

/// Occupation vector over an ordered orbital set.
using Occupation = std::vector<std::uint8_t>;

/// Parity-selected basis of two bosons on one site: the connected component
/// of a designated initial state under the parity-allowed interaction
/// elements. The initial state comes first, then lexicographic order.
class TwoParticleBasis {
 public:
  static TwoParticleBasis build(const std::vector<Orbital>& orbitals,
                                const Occupation& initial);
  /// Basis grown from two bosons in orbital `o`.
  static TwoParticleBasis from_pair(const std::vector<Orbital>& orbitals,
                                    Orbital o);

  int dim() const { return static_cast<int>(states_.size()); }
  const std::vector<Occupation>& states() const { return states_; }
  const std::vector<Orbital>& orbitals() const { return orbitals_; }
  int initial_index() const { return 0; }

  /// Index of the state with bosons in orbitals a and b, or -1.
  int index_of_pair(Orbital a, Orbital b) const;
  int index_of(const Occupation& occ) const;
  /// Compact state name, e.g. "ss", "pxpx", "sdx".
  std::string state_name(int index) const;

 private:
  std::vector<Orbital> orbitals_;
  std::vector<Occupation> states_;
};

/// Second-quantized on-site interaction term
///   weight * W[key] * adag_a adag_b a_c a_d
/// with unordered create/destroy pairs; weight carries the 1/2 prefactor and
/// the pair multiplicities.
struct OnsiteTerm {
  int a, b, c, d;  // indices into the orbital set, a <= b, c <= d
  ParamKey key;
  double weight;
};

/// All parity-allowed interaction terms over an orbital set.
std::vector<OnsiteTerm> onsite_interaction_terms(
    const std::vector<Orbital>& orbitals);

/// Apply adag_a adag_b a_c a_d to the occupation vector in place and return
/// the bosonic matrix element, or 0 if an annihilation is impossible (the
/// vector is then left unspecified).
double apply_quartic(std::span<std::uint8_t> n, int a, int b, int c, int d);

/// On-site Hamiltonian matrix over the two-particle basis; real symmetric,
/// in E_R. For the {s,px,py} basis grown from |2s> this is exactly
///   [ 2E_s+U_ss   U_sx        U_sy      ]
///   [ U_sx        2E_x+U_xx   U_xy      ]
///   [ U_sy        U_xy        2E_y+U_yy ].
Eigen::MatrixXd hamiltonian_matrix(const TwoParticleBasis& basis,
                                   const HubbardParams& params);

struct ResonancePrediction {
  double omega_recoil = 0.0;  // eigenvalue gap to the ground level, E_R/hbar
  double omega_hz = 0.0;      // 0 unless a UnitSystem was supplied
  int eigen_index = 0;
  std::string target;  // dominant basis state, or "+" / "-" on a tie
  double overlap = 0.0;
};

/// Eigenvalue gaps of the on-site matrix, sorted ascending, labeled by the
/// dominant basis component of the target eigenvector.
std::vector<ResonancePrediction> resonance_predictions(
    const Eigen::MatrixXd& h, const TwoParticleBasis& basis,
    const UnitSystem* units = nullptr);

}  // namespace latvib
