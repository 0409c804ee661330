#pragma once

// Finite tridiagonal operator (h psi)_x = psi_{x+1} + psi_{x-1} + h_x psi_x on
// sites 1..N with psi_0 = psi_{N+1} = 0, and its propagator e^{-i s h t}.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "lrcone/potentials.hpp"

namespace lrcone {

using Complex = std::complex<double>;

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Time scale of the propagator e^{-i s h t}: s = 1 drives one-body transport,
/// s = 2 drives the Jordan-Wigner fermions of the XY chain.
enum class Scale : int { transport = 1, fermion = 2 };

inline double scale_factor(Scale s) { return static_cast<double>(static_cast<int>(s)); }

class OneBodyOperator {
public:
    explicit OneBodyOperator(std::vector<double> diagonal);

    std::size_t size() const { return diagonal_.size(); }
    std::span<const double> diagonal() const { return diagonal_; }

    /// (h psi) with Dirichlet ends.
    std::vector<double> apply(std::span<const double> psi) const;
    /// Gershgorin radius 2 + max|h_x|; the spectrum lies in [-r, r].
    double spectral_radius_bound() const;
    /// Number of eigenvalues strictly below `energy` (Sturm sequence count).
    std::size_t count_below(double energy) const;

private:
    std::vector<double> diagonal_;
};

OneBodyOperator build_operator(const Field& field);

/// Eigenvalues ascending; column k of `vectors` is the unit eigenvector for values(k).
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;

    std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

/// Full spectral decomposition through LAPACK's divide-and-conquer driver (dstevd). The MRRR
/// driver was dropped: on the clustered spectra of large-coupling fields it loses
/// orthogonality (|V V^T - 1| up to 1e-8 at N = 2200), which swamps small tail amplitudes.
EigenSystem eigensystem(const OneBodyOperator& op);

struct EigenResiduals {
    double max_residual = 0.0;        // max_k ||h v_k - E_k v_k||_2
    double max_norm_defect = 0.0;     // max_k | ||v_k|| - 1 |
    double max_overlap = 0.0;         // max_{j != k} |<v_j, v_k>|
};

/// Residual diagnostics; the overlap scan is O(N^3) and skipped when `with_overlaps` is false.
EigenResiduals eigen_residuals(const OneBodyOperator& op, const EigenSystem& eig,
                               bool with_overlaps = true);

struct AmplitudeRow {
    std::size_t source = 1;
    double time = 0.0;
    Scale scale = Scale::transport;
    /// amplitudes[y-1] = <delta_source| e^{-i s h t} |delta_y>
    std::vector<Complex> amplitudes;

    double norm_squared() const;
};

/// K_{x,y}(s t) = sum_k v_k(x) v_k(y) exp(-i s E_k t) for all y.
AmplitudeRow amplitude_row(const EigenSystem& eig, std::size_t x, double t, Scale s);

/// P(x, t) = sum_{x' > x} |<delta_x'| e^{-i t h} |delta_1>|^2 for x >= 0.
double outside_probability(const EigenSystem& eig, std::size_t x, double t);

/// P(x, t) for x = 0..N from a single row; entry N is 0.
std::vector<double> outside_profile(const AmplitudeRow& row);

/// sum_{y = x'}^{N} |K_{x,y}(2t)|, requires 1 <= x < x' <= N.
double tail_sum(const EigenSystem& eig, std::size_t x, std::size_t x_prime, double t);

/// tails[j] = sum_{y > j} |row_y| for j = 0..N, so tails[x'-1] is the tail from x'.
std::vector<double> tail_profile(const AmplitudeRow& row);

/// <delta_x| (op - z)^{-1} |delta_y> by a tridiagonal solve; throws NumericalError when z
/// is within 1e-8 of the spectrum.
Complex resolvent_element(const OneBodyOperator& op, Complex z, std::size_t x, std::size_t y);

struct DunfordOptions {
    double margin = 1.0;
    int points = 1024;
};

/// <delta_x| e^{-2 i h t} |delta_y> as the contour integral
/// -(1/2 pi i) oint e^{-i t z} <delta_x|(2h - z)^{-1}|delta_y> dz over a rectangle enclosing
/// [-2r, 2r] (r the Gershgorin bound) with the given margin, by composite trapezoid
/// quadrature after a smoothing change of variables on each side.
Complex dunford_amplitude(const OneBodyOperator& op, std::size_t x, std::size_t y, double t,
                          const DunfordOptions& options = {});

/// Evaluates at points/2 and points (points >= 128) and throws NumericalError when they
/// disagree by more than `tolerance`.
Complex dunford_amplitude_checked(const OneBodyOperator& op, std::size_t x, std::size_t y,
                                  double t, const DunfordOptions& options = {},
                                  double tolerance = 1e-6);

struct TransferMatrix {
    std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};  // row-major
    double energy = 0.0;
    std::size_t first = 1;
    std::size_t last = 1;

    double operator()(int row, int col) const { return m[2 * row + col]; }
    double determinant() const { return m[0] * m[3] - m[1] * m[2]; }
    double half_trace() const { return 0.5 * (m[0] + m[3]); }
    double norm() const;  // spectral norm
    /// T (u, w)^T
    std::array<double, 2> apply(std::array<double, 2> v) const;
};

/// T = A_b ... A_a with A_x = [[E - h_x, -1], [1, 0]], mapping (psi_a, psi_{a-1})
/// to (psi_{b+1}, psi_b) for solutions of h psi = E psi.
TransferMatrix transfer_matrix(std::span<const double> field, double energy, std::size_t a,
                               std::size_t b);
TransferMatrix transfer_matrix(const Field& field, double energy, std::size_t a, std::size_t b);

}  // namespace lrcone
