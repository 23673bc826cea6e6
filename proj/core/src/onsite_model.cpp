#include "latvib/onsite_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace latvib {

TwoParticleBasis TwoParticleBasis::build(const std::vector<Orbital>& orbitals,
                                         const Occupation& initial) {
  if (orbitals.empty()) {
    throw std::invalid_argument("TwoParticleBasis: empty orbital set");
  }
  std::vector<Orbital> set = orbitals;
  std::sort(set.begin(), set.end());
  if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
    throw std::invalid_argument("TwoParticleBasis: duplicate orbitals");
  }
  if (initial.size() != set.size()) {
    throw std::invalid_argument(
        "TwoParticleBasis: initial occupation size does not match set");
  }
  const int total = std::accumulate(initial.begin(), initial.end(), 0);
  if (total != 2) {
    throw std::invalid_argument("TwoParticleBasis: particle number must be 2");
  }

  // BFS over parity-allowed pair moves.
  const int ns = static_cast<int>(set.size());
  std::vector<Occupation> found = {initial};
  auto known = [&](const Occupation& occ) {
    return std::find(found.begin(), found.end(), occ) != found.end();
  };
  for (std::size_t head = 0; head < found.size(); ++head) {
    const Occupation cur = found[head];
    for (int c = 0; c < ns; ++c)
      for (int d = c; d < ns; ++d)
        for (int a = 0; a < ns; ++a)
          for (int b = a; b < ns; ++b) {
            if (!w_allowed(set[a], set[b], set[c], set[d])) continue;
            Occupation next = cur;
            if (apply_quartic(next, a, b, c, d) == 0.0) continue;
            if (!known(next)) found.push_back(next);
          }
  }

  TwoParticleBasis basis;
  basis.orbitals_ = std::move(set);
  std::sort(found.begin() + 1, found.end());
  basis.states_ = std::move(found);
  return basis;
}

TwoParticleBasis TwoParticleBasis::from_pair(
    const std::vector<Orbital>& orbitals, Orbital o) {
  std::vector<Orbital> set = orbitals;
  std::sort(set.begin(), set.end());
  Occupation init(set.size(), 0);
  auto it = std::find(set.begin(), set.end(), o);
  if (it == set.end()) {
    throw std::invalid_argument("TwoParticleBasis: orbital not in set");
  }
  init[it - set.begin()] = 2;
  return build(set, init);
}

int TwoParticleBasis::index_of_pair(Orbital a, Orbital b) const {
  Occupation occ(orbitals_.size(), 0);
  for (Orbital o : {a, b}) {
    auto it = std::find(orbitals_.begin(), orbitals_.end(), o);
    if (it == orbitals_.end()) return -1;
    occ[it - orbitals_.begin()] += 1;
  }
  return index_of(occ);
}

int TwoParticleBasis::index_of(const Occupation& occ) const {
  auto it = std::find(states_.begin(), states_.end(), occ);
  return it == states_.end() ? -1 : static_cast<int>(it - states_.begin());
}

std::string TwoParticleBasis::state_name(int index) const {
  const Occupation& occ = states_.at(index);
  std::string out;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    for (int r = 0; r < occ[i]; ++r) out += orbitals_[i].name();
  }
  return out;
}

std::vector<OnsiteTerm> onsite_interaction_terms(
    const std::vector<Orbital>& orbitals) {
  std::vector<OnsiteTerm> terms;
  const int ns = static_cast<int>(orbitals.size());
  for (int a = 0; a < ns; ++a)
    for (int b = a; b < ns; ++b)
      for (int c = 0; c < ns; ++c)
        for (int d = c; d < ns; ++d) {
          if (!w_allowed(orbitals[a], orbitals[b], orbitals[c], orbitals[d]))
            continue;
          OnsiteTerm t;
          t.a = a;
          t.b = b;
          t.c = c;
          t.d = d;
          t.key.kind = ParamKey::Kind::Interaction;
          t.key.w = make_wkey(orbitals[a], orbitals[b], orbitals[c], orbitals[d]);
          t.weight = 0.5 * (a == b ? 1.0 : 2.0) * (c == d ? 1.0 : 2.0);
          terms.push_back(t);
        }
  return terms;
}

double apply_quartic(std::span<std::uint8_t> n, int a, int b, int c, int d) {
  double amp = 1.0;
  if (n[d] == 0) return 0.0;
  amp *= std::sqrt(double(n[d]));
  n[d] -= 1;
  if (n[c] == 0) {
    n[d] += 1;
    return 0.0;
  }
  amp *= std::sqrt(double(n[c]));
  n[c] -= 1;
  n[b] += 1;
  amp *= std::sqrt(double(n[b]));
  n[a] += 1;
  amp *= std::sqrt(double(n[a]));
  return amp;
}

Eigen::MatrixXd hamiltonian_matrix(const TwoParticleBasis& basis,
                                   const HubbardParams& params) {
  const auto& set = basis.orbitals();
  for (Orbital o : set) {
    if (!params.has(o)) {
      throw std::invalid_argument("hamiltonian_matrix: params missing orbital " +
                                  o.name());
    }
  }
  const int dim = basis.dim();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

  for (int col = 0; col < dim; ++col) {
    const Occupation& occ = basis.states()[col];
    double diag = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      diag += params.energy(set[i]) * occ[i];
    }
    h(col, col) += diag;
  }

  const auto terms = onsite_interaction_terms(set);
  Occupation scratch;
  for (int col = 0; col < dim; ++col) {
    for (const OnsiteTerm& t : terms) {
      scratch = basis.states()[col];
      const double amp = apply_quartic(scratch, t.a, t.b, t.c, t.d);
      if (amp == 0.0) continue;
      const int row = basis.index_of(scratch);
      if (row < 0) continue;  // outside the connected component
      h(row, col) += t.weight * params.value(t.key) * amp;
    }
  }
  return h;
}

std::vector<ResonancePrediction> resonance_predictions(
    const Eigen::MatrixXd& h, const TwoParticleBasis& basis,
    const UnitSystem* units) {
  if (h.rows() != h.cols() || h.rows() != basis.dim()) {
    throw std::invalid_argument("resonance_predictions: dimension mismatch");
  }
  if ((h - h.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("resonance_predictions: matrix not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const Eigen::MatrixXd& vec = solver.eigenvectors();

  std::vector<ResonancePrediction> out;
  for (int i = 1; i < basis.dim(); ++i) {
    ResonancePrediction p;
    p.omega_recoil = ev(i) - ev(0);
    p.omega_hz = units != nullptr ? units->omega_to_hz(p.omega_recoil) : 0.0;
    p.eigen_index = i;

    // Dominant component; a symmetric-lattice tie between mirrored states is
    // labeled by the relative sign of the pair.
    Eigen::VectorXd mag = vec.col(i).cwiseAbs2();
    int first = 0;
    mag.maxCoeff(&first);
    int second = -1;
    double best2 = -1.0;
    for (int j = 0; j < basis.dim(); ++j) {
      if (j != first && mag(j) > best2) {
        best2 = mag(j);
        second = j;
      }
    }
    p.overlap = mag(first);
    if (second >= 0 && std::abs(mag(first) - mag(second)) < 1e-9) {
      p.target = vec(first, i) * vec(second, i) > 0.0 ? "+" : "-";
    } else {
      p.target = basis.state_name(first);
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace latvib
