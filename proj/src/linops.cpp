#include "qflux/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qflux {

namespace {

std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int k = static_cast<int>(dims.size()) - 2; k >= 0; --k) s[k] = s[k + 1] * dims[k + 1];
  return s;
}

void check_dims(const std::vector<int>& dims, const Mat& m) {
  if (dims.empty()) throw std::invalid_argument("empty dimension list");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("subsystem dimension must be >= 1");
  if (m.rows() != m.cols() || m.rows() != product_dim(dims))
    throw std::invalid_argument("matrix size does not match subsystem dimensions");
}

Eigen::SelfAdjointEigenSolver<Mat> hermitian_eigs(const Mat& m, const char* what) {
  double herm_dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > kHermTol)
    throw std::invalid_argument(std::string(what) + ": matrix not Hermitian (deviation " +
                                std::to_string(herm_dev) + ")");
  Mat sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": eigensolver failed");
  return es;
}

}  // namespace

int product_dim(const std::vector<int>& dims) {
  int d = 1;
  for (int x : dims) d *= x;
  return d;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vec basis_state(int d, int j) {
  Vec v = Vec::Zero(d);
  v(j) = 1.0;
  return v;
}

Mat projector(const Vec& v) { return v * v.adjoint(); }

DensityMatrix DensityMatrix::unchecked(std::vector<int> dims, Mat m) {
  check_dims(dims, m);
  return DensityMatrix{std::move(dims), std::move(m)};
}

DensityMatrix DensityMatrix::checked(std::vector<int> dims, Mat m) {
  DensityMatrix rho = unchecked(std::move(dims), std::move(m));
  rho.validate();
  return rho;
}

void DensityMatrix::validate() const {
  double herm_dev = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  if (herm_dev > kHermTol)
    throw std::invalid_argument("density matrix not Hermitian (deviation " +
                                std::to_string(herm_dev) + ")");
  double tr_dev = std::abs(mat.trace() - cplx(1.0, 0.0));
  if (tr_dev > kTraceTol)
    throw std::invalid_argument("density matrix trace differs from 1 by " + std::to_string(tr_dev));
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (mat + mat.adjoint()));
  if (es.eigenvalues().minCoeff() < -kPsdTol)
    throw std::invalid_argument("density matrix has eigenvalue " +
                                std::to_string(es.eigenvalues().minCoeff()));
}

ProbDist ProbDist::checked(std::vector<double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (x < 0.0) throw std::invalid_argument("probability must be nonnegative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kTraceTol)
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum));
  return ProbDist{std::move(p)};
}

double binary_entropy(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p outside [0,1]");
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

double shannon_entropy(const ProbDist& dist) {
  double s = 0.0;
  for (double x : dist.p)
    if (x > 0.0) s -= x * std::log2(x);
  return s;
}

double bosonic_h(double x) {
  if (x < 0.0) throw std::invalid_argument("bosonic_h: negative photon number");
  if (x < 1e-300) return 0.0;
  // x*log2(1+1/x) + log2(x+1), stable for both small and large x
  return x * std::log1p(1.0 / x) / M_LN2 + std::log2(x + 1.0);
}

double von_neumann_entropy(const DensityMatrix& rho) {
  auto es = hermitian_eigs(rho.mat, "von_neumann_entropy");
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam > kLogCutoff) s -= lam * std::log2(lam);
  }
  return std::max(0.0, s);
}

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dims != sigma.dims)
    throw std::invalid_argument("relative_entropy: dimension mismatch");
  auto es = hermitian_eigs(sigma.mat, "relative_entropy(sigma)");
  double cross = 0.0;  // -sum_i <i|rho|i> log2 s_i
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double s_i = es.eigenvalues()(i);
    Vec v = es.eigenvectors().col(i);
    double q_i = std::real(v.dot(rho.mat * v));
    if (s_i < kLogCutoff) {
      if (q_i > 1e-12) return infinity();  // support(rho) not inside support(sigma)
      continue;
    }
    cross -= q_i * std::log2(s_i);
  }
  double val = cross - von_neumann_entropy(rho);
  if (val < 0.0 && val > -1e-11) val = 0.0;
  return val;
}

double trace_distance(const Mat& a, const Mat& b) {
  Mat diff = a - b;
  auto es = hermitian_eigs(diff, "trace_distance");
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep) {
  const auto& dims = rho.dims;
  const int m = static_cast<int>(dims.size());
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  std::vector<bool> kept(m, false);
  for (int k : keep) {
    if (k < 0 || k >= m) throw std::invalid_argument("partial_trace: subsystem index out of range");
    if (kept[k]) throw std::invalid_argument("partial_trace: duplicate subsystem index");
    kept[k] = true;
  }
  std::vector<int> keep_sorted(keep);
  std::sort(keep_sorted.begin(), keep_sorted.end());

  std::vector<int> kdims, tdims, tsub;
  for (int k : keep_sorted) kdims.push_back(dims[k]);
  for (int j = 0; j < m; ++j)
    if (!kept[j]) {
      tdims.push_back(dims[j]);
      tsub.push_back(j);
    }
  const int dk = product_dim(kdims);
  const int dt = tdims.empty() ? 1 : product_dim(tdims);

  auto strides = strides_of(dims);
  // flat index of (kept multi-index k, traced multi-index t)
  auto flat = [&](int kidx, int tidx) {
    int idx = 0;
    for (int j = static_cast<int>(keep_sorted.size()) - 1; j >= 0; --j) {
      idx += (kidx % kdims[j]) * strides[keep_sorted[j]];
      kidx /= kdims[j];
    }
    for (int j = static_cast<int>(tsub.size()) - 1; j >= 0; --j) {
      idx += (tidx % tdims[j]) * strides[tsub[j]];
      tidx /= tdims[j];
    }
    return idx;
  };

  Mat out = Mat::Zero(dk, dk);
  for (int r = 0; r < dk; ++r)
    for (int c = 0; c < dk; ++c) {
      cplx acc = 0.0;
      for (int t = 0; t < dt; ++t) acc += rho.mat(flat(r, t), flat(c, t));
      out(r, c) = acc;
    }
  return DensityMatrix::unchecked(kdims, std::move(out));
}

DensityMatrix partial_transpose(const DensityMatrix& rho, int subsystem) {
  if (rho.dims.size() != 2)
    throw std::invalid_argument("partial_transpose: register must be bipartite");
  if (subsystem < 0 || subsystem > 1)
    throw std::invalid_argument("partial_transpose: subsystem index out of range");
  const int da = rho.dims[0], db = rho.dims[1];
  Mat out(rho.mat.rows(), rho.mat.cols());
  for (int a = 0; a < da; ++a)
    for (int b = 0; b < db; ++b)
      for (int ap = 0; ap < da; ++ap)
        for (int bp = 0; bp < db; ++bp) {
          int r = a * db + b, c = ap * db + bp;
          int rt = subsystem == 0 ? ap * db + b : a * db + bp;
          int ct = subsystem == 0 ? a * db + bp : ap * db + b;
          out(rt, ct) = rho.mat(r, c);
        }
  return DensityMatrix::unchecked(rho.dims, std::move(out));
}

double partial_transpose_min_eig(const DensityMatrix& rho, int subsystem) {
  DensityMatrix pt = partial_transpose(rho, subsystem);
  auto es = hermitian_eigs(pt.mat, "partial_transpose_min_eig");
  return es.eigenvalues().minCoeff();
}

DensityMatrix permute_subsystems(const DensityMatrix& rho, const std::vector<int>& order) {
  const auto& dims = rho.dims;
  const int m = static_cast<int>(dims.size());
  if (static_cast<int>(order.size()) != m)
    throw std::invalid_argument("permute_subsystems: order size mismatch");
  std::vector<int> new_dims(m);
  std::vector<bool> seen(m, false);
  for (int j = 0; j < m; ++j) {
    int o = order[j];
    if (o < 0 || o >= m || seen[o]) throw std::invalid_argument("permute_subsystems: bad order");
    seen[o] = true;
    new_dims[j] = dims[o];
  }
  auto old_strides = strides_of(dims);
  auto new_strides = strides_of(new_dims);
  const int D = rho.dim();
  std::vector<int> map(D);
  for (int idx = 0; idx < D; ++idx) {
    int rem = idx, nidx = 0;
    std::vector<int> digit(m);
    for (int j = 0; j < m; ++j) {
      digit[j] = rem / old_strides[j];
      rem %= old_strides[j];
    }
    for (int j = 0; j < m; ++j) nidx += digit[order[j]] * new_strides[j];
    map[idx] = nidx;
  }
  Mat out(D, D);
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) out(map[r], map[c]) = rho.mat(r, c);
  return DensityMatrix::unchecked(std::move(new_dims), std::move(out));
}

namespace {

// (op (x) I_rest) * m with the op acting on the leading block of the row index.
Mat left_apply_front(const Mat& op, const Mat& m, int t_old, int rest) {
  const int t_new = static_cast<int>(op.rows());
  Mat out = Mat::Zero(static_cast<Eigen::Index>(t_new) * rest, m.cols());
  for (int tn = 0; tn < t_new; ++tn)
    for (int to = 0; to < t_old; ++to) {
      cplx w = op(tn, to);
      if (w == cplx(0.0, 0.0)) continue;
      out.middleRows(static_cast<Eigen::Index>(tn) * rest, rest) +=
          w * m.middleRows(static_cast<Eigen::Index>(to) * rest, rest);
    }
  return out;
}

}  // namespace

DensityMatrix apply_on_subsystems(const DensityMatrix& rho, const std::vector<int>& targets,
                                  const Mat& op, const std::vector<int>& new_dims) {
  const int m = static_cast<int>(rho.dims.size());
  if (targets.empty()) throw std::invalid_argument("apply_on_subsystems: no targets");
  if (new_dims.size() != targets.size())
    throw std::invalid_argument("apply_on_subsystems: new_dims size mismatch");
  std::vector<bool> is_target(m, false);
  int t_old = 1;
  for (int t : targets) {
    if (t < 0 || t >= m) throw std::invalid_argument("apply_on_subsystems: target out of range");
    if (is_target[t]) throw std::invalid_argument("apply_on_subsystems: duplicate target");
    is_target[t] = true;
    t_old *= rho.dims[t];
  }
  const int t_new = product_dim(new_dims);
  if (op.cols() != t_old || op.rows() != t_new)
    throw std::invalid_argument("apply_on_subsystems: operator shape mismatch");

  // Bring targets to the front in the given order.
  std::vector<int> order(targets);
  for (int j = 0; j < m; ++j)
    if (!is_target[j]) order.push_back(j);
  DensityMatrix perm = permute_subsystems(rho, order);
  const int rest = perm.dim() / t_old;

  Mat tmp = left_apply_front(op, perm.mat, t_old, rest);
  Mat res = left_apply_front(op, tmp.adjoint(), t_old, rest).adjoint();

  std::vector<int> front_dims(new_dims);
  for (int j = 0; j < m; ++j)
    if (!is_target[j]) front_dims.push_back(rho.dims[j]);
  DensityMatrix moved = DensityMatrix::unchecked(front_dims, std::move(res));

  // Undo the permutation: new slot layout equals the old one with target dims replaced.
  std::vector<int> inverse(m);
  for (int j = 0; j < m; ++j) inverse[order[j]] = j;
  return permute_subsystems(moved, inverse);
}

DensityMatrix apply_on_subsystems(const DensityMatrix& rho, const std::vector<int>& targets,
                                  const Mat& op) {
  std::vector<int> keep;
  for (int t : targets) keep.push_back(rho.dims[t]);
  return apply_on_subsystems(rho, targets, op, keep);
}

DensityMatrix apply_kraus_on_subsystems(const DensityMatrix& rho, const std::vector<int>& targets,
                                        const std::vector<Mat>& kraus,
                                        const std::vector<int>& new_dims) {
  if (kraus.empty()) throw std::invalid_argument("apply_kraus_on_subsystems: empty Kraus list");
  DensityMatrix acc = apply_on_subsystems(rho, targets, kraus[0], new_dims);
  for (size_t i = 1; i < kraus.size(); ++i)
    acc.mat += apply_on_subsystems(rho, targets, kraus[i], new_dims).mat;
  return acc;
}

DensityMatrix drop_unit_dims(const DensityMatrix& rho) {
  std::vector<int> dims;
  for (int d : rho.dims)
    if (d > 1) dims.push_back(d);
  if (dims.empty()) dims.push_back(1);
  return DensityMatrix::unchecked(std::move(dims), rho.mat);
}

}  // namespace qflux
