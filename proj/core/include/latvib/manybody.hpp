#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <span>
#include <unordered_map>
#include <vector>

#include "latvib/dynamics.hpp"
#include "latvib/hubbard_params.hpp"
#include "latvib/onsite_model.hpp"

namespace latvib {

/// Bosonic occupation-number basis over (site, orbital) modes at fixed total
/// particle number. Deterministic lexicographic ordering of the occupation
/// vectors (first mode most significant, descending).
class FockBasis {
 public:
  static FockBasis build(int sites, const std::vector<Orbital>& orbitals,
                         int particles);

  int sites() const { return sites_; }
  int particles() const { return particles_; }
  const std::vector<Orbital>& orbitals() const { return orbitals_; }
  int n_orbitals() const { return static_cast<int>(orbitals_.size()); }
  int modes() const { return sites_ * n_orbitals(); }
  int mode(int site, int orbital_index) const {
    return site * n_orbitals() + orbital_index;
  }
  long long dimension() const { return static_cast<long long>(states_.size()); }
  const std::vector<Occupation>& states() const { return states_; }
  int index_of(const Occupation& occ) const;

  /// Exact dimension C(N + M - 1, M - 1) without enumeration.
  static long long predicted_dimension(int modes, int particles);

 private:
  int sites_ = 0;
  int particles_ = 0;
  std::vector<Orbital> orbitals_;
  std::vector<Occupation> states_;
  std::unordered_map<std::uint64_t, int> index_;
  static std::uint64_t pack(const Occupation& occ);
};

/// Sparse lattice Hamiltonian over a FockBasis with the entry values kept
/// symbolic: every nonzero is a linear combination of HubbardParams entries,
/// so time-dependent parameters only refresh a value array. Hermitian by
/// construction (conjugate term pairs are generated explicitly).
class ManyBodyModel {
 public:
  /// chain_axis 0 runs the 1D chain along x (hopping bands = n_x) and is the
  /// vibrated direction; 1 runs it along y.
  ManyBodyModel(FockBasis basis, bool pbc, int chain_axis = 0);

  const FockBasis& basis() const { return basis_; }
  bool periodic() const { return pbc_; }
  int chain_axis() const { return chain_axis_; }
  long long dim() const { return basis_.dimension(); }
  long long nonzeros() const { return static_cast<long long>(cols_.size()); }

  /// Entry keys the model depends on; value arrays passed to refresh() are
  /// aligned with HubbardParams::keys() of the same orbital set.
  const std::vector<ParamKey>& keys() const { return keys_; }

  /// Materialize the sparse matrix for fixed parameters.
  Eigen::SparseMatrix<double> assemble(const HubbardParams& params) const;

  /// Refresh the nonzero values from entry values aligned with keys().
  void refresh(std::span<const double> entry_values,
               std::vector<double>& nnz_values) const;
  /// y = H x with the given nonzero values.
  void matvec(const std::vector<double>& nnz_values,
              const std::complex<double>* x, std::complex<double>* y) const;
  void matvec(const std::vector<double>& nnz_values, const double* x,
              double* y) const;
  double mean_diagonal(const std::vector<double>& nnz_values) const;

 private:
  void build_terms();
  FockBasis basis_;
  bool pbc_ = true;
  int chain_axis_ = 0;
  std::vector<ParamKey> keys_;

  // CSR with per-nonzero symbolic terms.
  std::vector<long long> row_ptr_;
  std::vector<int> cols_;
  std::vector<long long> term_ptr_;    // into term_entry_/term_weight_
  std::vector<int> term_entry_;
  std::vector<double> term_weight_;
  std::vector<long long> diag_nnz_;    // nnz index of each diagonal element
};

struct GroundState {
  Eigen::VectorXd vector;
  double energy = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// Lowest eigenpair by restarted Lanczos with full reorthogonalization.
GroundState ground_state(const ManyBodyModel& model, const HubbardParams& params,
                         double residual_tol = 1e-8, int max_iterations = 2000);

struct ManyBodyEvolveOptions {
  double tolerance = 1e-9;   // per-step Krylov error
  int krylov_cap = 30;
  double step = 0.0;         // 0: drive period / 40
  int sample_stride = 4;     // record every n-th step
  /// Entry overrides applied after every table evaluation (e.g. zero the
  /// hopping entries to decouple the sites).
  std::vector<std::pair<ParamKey, double>> overrides;
};

struct ManyBodyTrajectory {
  std::vector<double> t;
  /// Per sample: occupation expectation of every (site, orbital) mode.
  std::vector<Eigen::VectorXd> mode_occupation;
  /// Per sample: on-site total-number variance per site.
  std::vector<Eigen::VectorXd> site_variance;
  std::vector<double> energy;
  std::vector<double> norm_error;
  /// Site-averaged fraction of atoms promoted out of the s orbital.
  std::vector<double> promoted_fraction;
  std::size_t steps = 0;
  Eigen::VectorXcd final_state;
};

/// Propagate under the drive with the fourth-order commutator-free Magnus
/// scheme, applying each exponential with an adaptive-order Lanczos-Krylov
/// expansion. Throws if the Krylov cap cannot meet the tolerance.
ManyBodyTrajectory evolve_manybody(const ManyBodyModel& model,
                                   const ParameterTable& table,
                                   const Drive& drive,
                                   const Eigen::VectorXcd& psi0, double t0,
                                   double t1,
                                   const ManyBodyEvolveOptions& opts = {});

}  // namespace latvib
