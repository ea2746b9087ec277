#pragma once

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qflux {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

inline constexpr double kHermTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kLogCutoff = 1e-15;

inline double infinity() { return std::numeric_limits<double>::infinity(); }

/// Density operator on a labeled tensor-product register.
/// dims lists the subsystem dimensions; mat has size prod(dims).
struct DensityMatrix {
  std::vector<int> dims;
  Mat mat;

  int dim() const { return static_cast<int>(mat.rows()); }

  /// Validates Hermiticity, unit trace and positivity; throws std::invalid_argument.
  static DensityMatrix checked(std::vector<int> dims, Mat m);
  /// No validation; for intermediate (possibly unnormalized) states.
  static DensityMatrix unchecked(std::vector<int> dims, Mat m);

  void validate() const;
};

struct ProbDist {
  std::vector<double> p;
  static ProbDist checked(std::vector<double> p);
};

int product_dim(const std::vector<int>& dims);

Mat kron(const Mat& a, const Mat& b);
Vec basis_state(int d, int j);
Mat projector(const Vec& v);

// --- entropy primitives (all in bits) ---

double binary_entropy(double p);
double shannon_entropy(const ProbDist& p);
/// h(x) = (x+1)log2(x+1) - x log2 x for mean photon number x >= 0.
double bosonic_h(double x);

double von_neumann_entropy(const DensityMatrix& rho);

/// S(rho||sigma) via sigma's eigenbasis; +infinity on support mismatch.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

double trace_distance(const Mat& a, const Mat& b);

// --- register calculus ---

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep);

/// Minimum eigenvalue of the partial transpose over `subsystem`; requires a
/// bipartite register. PPT iff result >= -kPsdTol.
double partial_transpose_min_eig(const DensityMatrix& rho, int subsystem);

DensityMatrix partial_transpose(const DensityMatrix& rho, int subsystem);

/// Reorders subsystems: new position j holds old subsystem order[j].
DensityMatrix permute_subsystems(const DensityMatrix& rho, const std::vector<int>& order);

/// Applies op (shape prod(new_dims) x prod(old target dims)) to the listed
/// target subsystems: rho -> (op (x) I) rho (op (x) I)^dag. Targets keep their
/// slots; slot k gets dimension new_dims[k]. Works for unitaries, projectors
/// and rectangular Kraus operators alike.
DensityMatrix apply_on_subsystems(const DensityMatrix& rho, const std::vector<int>& targets,
                                  const Mat& op, const std::vector<int>& new_dims);

/// Square-op convenience overload (dimensions preserved).
DensityMatrix apply_on_subsystems(const DensityMatrix& rho, const std::vector<int>& targets,
                                  const Mat& op);

/// Sum_m K_m rho K_m^dag on the target subsystems.
DensityMatrix apply_kraus_on_subsystems(const DensityMatrix& rho, const std::vector<int>& targets,
                                        const std::vector<Mat>& kraus,
                                        const std::vector<int>& new_dims);

/// Removes dimension-1 subsystems (data unchanged).
DensityMatrix drop_unit_dims(const DensityMatrix& rho);

}  // namespace qflux
