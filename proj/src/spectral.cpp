#include "sisdecay/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace sisdecay {

SparseMetzler::SparseMetzler(SparseMat m) : mat_(std::move(m)) {
  if (mat_.rows() != mat_.cols())
    throw InputError("Metzler matrix must be square");
  if (mat_.rows() < 1) throw InputError("Metzler matrix must be nonempty");
  mat_.prune(0.0);
  mat_.makeCompressed();
  for (int col = 0; col < mat_.outerSize(); ++col) {
    for (SparseMat::InnerIterator it(mat_, col); it; ++it) {
      if (!std::isfinite(it.value()))
        throw InputError("non-finite matrix entry");
      if (it.row() != it.col() && it.value() < 0.0)
        throw InputError("negative off-diagonal entry at (" +
                         std::to_string(it.row()) + ", " + std::to_string(it.col()) +
                         ") violates the Metzler property");
    }
  }
}

SparseMetzler SparseMetzler::from_triplets(Index dim,
                                           const std::vector<Triplet>& triplets) {
  SparseMat m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());  // duplicates summed
  return SparseMetzler(std::move(m));
}

SparseMetzler SparseMetzler::from_sparse(SparseMat m) {
  return SparseMetzler(std::move(m));
}

SparseMetzler SparseMetzler::from_dense(const Eigen::Ref<const Matrix>& m) {
  return SparseMetzler(m.sparseView());
}

SparseMetzler SparseMetzler::transposed() const {
  return SparseMetzler(SparseMat(mat_.transpose()));
}

namespace {

// Clean up a computed Perron direction: flip the overall sign if needed,
// zero out roundoff-level negative entries, scale to max entry 1.
Vector sanitize_perron(Vector v) {
  Index argmax = 0;
  v.cwiseAbs().maxCoeff(&argmax);
  if (v[argmax] < 0.0) v = -v;
  const Scalar floor = -1e-12 * std::abs(v[argmax]);
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0 && v[i] >= floor) v[i] = 0.0;
  }
  const Scalar mx = v.maxCoeff();
  if (mx > 0.0) v /= mx;
  return v;
}

Scalar inf_norm_residual(const SparseMat& m, const Vector& v, Scalar lambda) {
  return (m * v - lambda * v).cwiseAbs().maxCoeff();
}

}  // namespace

EigResult lambda_max_dense(const Eigen::Ref<const Matrix>& m) {
  EigResult res;
  res.used_dense = true;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success) return res;
  const auto values = solver.eigenvalues();
  Index best = 0;
  for (Index i = 1; i < values.size(); ++i)
    if (values[i].real() > values[best].real()) best = i;
  res.lambda_max = values[best].real();
  res.eigvec = sanitize_perron(solver.eigenvectors().col(best).real());
  res.residual = (m * res.eigvec - res.lambda_max * res.eigvec).cwiseAbs().maxCoeff();
  res.converged = true;
  return res;
}

Scalar spectral_abscissa(const Eigen::Ref<const Matrix>& m) {
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw NumericError("dense eigensolver failed");
  return solver.eigenvalues().real().maxCoeff();
}

EigResult lambda_max_power(const SparseMetzler& m, Scalar tol, Index max_iter) {
  if (tol <= 0.0) throw InputError("tolerance must be positive");
  const SparseMat& a = m.matrix();
  const Index n = a.rows();

  Scalar max_abs_diag = 0.0;
  for (Index i = 0; i < n; ++i)
    max_abs_diag = std::max(max_abs_diag, std::abs(a.coeff(i, i)));
  const Scalar shift = max_abs_diag + 1.0;  // a + shift*I is >= 0 with positive diagonal

  EigResult res;
  Vector v = Vector::Ones(n);
  Scalar lambda = std::numeric_limits<Scalar>::quiet_NaN();
  for (Index iter = 1; iter <= max_iter; ++iter) {
    Vector w = a * v + shift * v;
    const Scalar rayleigh = v.dot(w) / v.dot(v);
    const Scalar lambda_new = rayleigh - shift;
    const Scalar norm = w.cwiseAbs().maxCoeff();
    // w >= v entrywise because the shifted diagonal is >= 1, so norm > 0.
    w /= norm;
    const Scalar resid = inf_norm_residual(a, w, lambda_new);
    const Scalar thresh = tol * std::max(Scalar(1), std::abs(lambda_new));
    res.iterations = iter;
    if (std::abs(lambda_new - lambda) < thresh && resid < thresh) {
      res.lambda_max = lambda_new;
      res.eigvec = sanitize_perron(std::move(w));
      res.residual = inf_norm_residual(a, res.eigvec, lambda_new);
      res.converged = true;
      return res;
    }
    lambda = lambda_new;
    v = std::move(w);
  }
  res.lambda_max = lambda;  // diagnostic state, flagged unconverged
  res.eigvec = sanitize_perron(std::move(v));
  res.residual = inf_norm_residual(a, res.eigvec, lambda);
  return res;
}

EigResult lambda_max(const SparseMetzler& m, const EigOptions& opts) {
  if (m.dim() <= opts.dense_threshold) return lambda_max_dense(m.dense());
  return lambda_max_power(m, opts.tol, opts.max_iter);
}

bool pattern_is_irreducible(const SparseMetzler& m) {
  const SparseMat& a = m.matrix();
  const Index n = a.rows();
  if (n == 1) return true;
  std::vector<std::vector<Index>> fwd(n), bwd(n);
  for (int col = 0; col < a.outerSize(); ++col) {
    for (SparseMat::InnerIterator it(a, col); it; ++it) {
      if (it.row() == it.col() || it.value() == 0.0) continue;
      fwd[it.col()].push_back(it.row());
      bwd[it.row()].push_back(it.col());
    }
  }
  auto reaches_all = [n](const std::vector<std::vector<Index>>& adj) {
    std::vector<char> seen(n, 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index count = 1;
    while (!stack.empty()) {
      const Index u = stack.back();
      stack.pop_back();
      for (Index v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return reaches_all(fwd) && reaches_all(bwd);
}

namespace {

// One uniformization step: v <- e^{m h} v with s*h small enough that the
// Poisson-weighted series stays short. Terminates when the remaining Poisson
// mass and the current term are both negligible against the accumulator.
Vector uniformization_step(const SparseMat& a, Scalar s, const Vector& v, Scalar h,
                           Scalar rel_tol) {
  const Scalar sh = s * h;
  Scalar weight = std::exp(-sh);  // Poisson(sh) mass at k = 0
  Scalar weight_sum = weight;
  Vector term = v;
  Vector acc = weight * term;
  Scalar acc_scale = std::max(acc.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff());
  int quiet = 0;
  for (Index k = 1; quiet < 3; ++k) {
    term = (a * term) / s + term;  // term <- p * term
    weight *= sh / static_cast<Scalar>(k);
    acc += weight * term;
    weight_sum += weight;
    acc_scale = std::max(acc_scale, acc.cwiseAbs().maxCoeff());
    const bool tail_small = (1.0 - weight_sum) < rel_tol && k >= static_cast<Index>(sh);
    const bool term_small = weight * term.cwiseAbs().maxCoeff() < rel_tol * acc_scale;
    quiet = (tail_small || term_small) ? quiet + 1 : 0;
  }
  return acc;
}

Vector expm_interval(const SparseMat& a, Scalar s, Vector v, Scalar dt,
                     Scalar rel_tol) {
  if (dt == 0.0) return v;
  constexpr Scalar kMaxStep = 64.0;  // cap on s*h per uniformization step
  const Index nsub = std::max<Index>(1, static_cast<Index>(std::ceil(s * dt / kMaxStep)));
  const Scalar h = dt / static_cast<Scalar>(nsub);
  for (Index i = 0; i < nsub; ++i) v = uniformization_step(a, s, v, h, rel_tol);
  return v;
}

}  // namespace

Matrix expm_action(const SparseMetzler& m, const Vector& v0,
                   const std::vector<Scalar>& grid, Scalar rel_tol) {
  const SparseMat& a = m.matrix();
  if (v0.size() != a.rows()) throw InputError("initial vector length mismatch");
  if (!v0.allFinite()) throw InputError("non-finite initial vector");
  Scalar max_abs_diag = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    max_abs_diag = std::max(max_abs_diag, std::abs(a.coeff(i, i)));
  const Scalar s = std::max(Scalar(1), max_abs_diag);

  Matrix out(a.rows(), static_cast<Index>(grid.size()));
  Vector v = v0;
  Scalar t_prev = 0.0;
  for (size_t k = 0; k < grid.size(); ++k) {
    const Scalar t = grid[k];
    if (!std::isfinite(t) || t < t_prev)
      throw InputError("time grid must be finite, nonnegative and nondecreasing");
    v = expm_interval(a, s, std::move(v), t - t_prev, rel_tol);
    out.col(static_cast<Index>(k)) = v;
    t_prev = t;
  }
  return out;
}

}  // namespace sisdecay
