#include "lrcone/onebody.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <lapacke.h>

namespace lrcone {

namespace {

void check_site(std::size_t x, std::size_t n, const char* what) {
    if (x < 1 || x > n)
        throw std::out_of_range(std::string(what) + " = " + std::to_string(x) + " outside [1, " +
                                std::to_string(n) + "]");
}

// Solves (scale*h - z) u = delta_y with partial pivoting (zgtsv).
std::vector<Complex> solve_shifted(std::span<const double> diag, double scale, Complex z,
                                   std::size_t y) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    std::vector<Complex> d(diag.size()), dl(diag.size() > 1 ? diag.size() - 1 : 1, scale),
        du(dl.size(), scale), u(diag.size(), 0.0);
    for (std::size_t i = 0; i < diag.size(); ++i) d[i] = scale * diag[i] - z;
    u[y - 1] = 1.0;
    const lapack_int info = LAPACKE_zgtsv(
        LAPACK_COL_MAJOR, n, 1, reinterpret_cast<lapack_complex_double*>(dl.data()),
        reinterpret_cast<lapack_complex_double*>(d.data()),
        reinterpret_cast<lapack_complex_double*>(du.data()),
        reinterpret_cast<lapack_complex_double*>(u.data()), n);
    if (info != 0)
        throw NumericalError("tridiagonal solve failed: exactly singular pivot " + std::to_string(info));
    return u;
}

}  // namespace

OneBodyOperator::OneBodyOperator(std::vector<double> diagonal) : diagonal_(std::move(diagonal)) {
    if (diagonal_.empty()) throw InvalidArgument("one-body operator needs N >= 1");
}

std::vector<double> OneBodyOperator::apply(std::span<const double> psi) const {
    const std::size_t n = size();
    if (psi.size() != n) throw InvalidArgument("vector length does not match operator size");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = diagonal_[i] * psi[i];
        if (i > 0) v += psi[i - 1];
        if (i + 1 < n) v += psi[i + 1];
        out[i] = v;
    }
    return out;
}

double OneBodyOperator::spectral_radius_bound() const {
    double m = 0.0;
    for (double h : diagonal_) m = std::max(m, std::abs(h));
    return 2.0 + m;
}

std::size_t OneBodyOperator::count_below(double energy) const {
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < diagonal_.size(); ++i) {
        q = diagonal_[i] - energy - (i > 0 ? 1.0 / q : 0.0);
        if (q == 0.0) q = -1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

OneBodyOperator build_operator(const Field& field) {
    return OneBodyOperator(std::vector<double>(field.values().begin(), field.values().end()));
}

EigenSystem eigensystem(const OneBodyOperator& op) {
    const lapack_int n = static_cast<lapack_int>(op.size());
    EigenSystem eig;
    eig.values = Eigen::Map<const Eigen::VectorXd>(op.diagonal().data(), n);
    eig.vectors.resize(n, n);
    std::vector<double> e(static_cast<std::size_t>(std::max<lapack_int>(n, 1)), 1.0);
    const lapack_int info =
        LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', n, eig.values.data(), e.data(), eig.vectors.data(), n);
    if (info != 0)
        throw NumericalError("dstevd failed to converge (info = " + std::to_string(info) + ")");
    return eig;
}

EigenResiduals eigen_residuals(const OneBodyOperator& op, const EigenSystem& eig,
                               bool with_overlaps) {
    const std::size_t n = op.size();
    EigenResiduals r;
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n)) = eig.vectors.col(k);
        const auto hv = op.apply(v);
        double res = 0.0, nrm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = hv[i] - eig.values(k) * v[i];
            res += d * d;
            nrm += v[i] * v[i];
        }
        r.max_residual = std::max(r.max_residual, std::sqrt(res));
        r.max_norm_defect = std::max(r.max_norm_defect, std::abs(std::sqrt(nrm) - 1.0));
    }
    if (with_overlaps) {
        Eigen::MatrixXd gram = eig.vectors.transpose() * eig.vectors;
        gram.diagonal().setZero();
        r.max_overlap = gram.cwiseAbs().maxCoeff();
    }
    return r;
}

double AmplitudeRow::norm_squared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
}

AmplitudeRow amplitude_row(const EigenSystem& eig, std::size_t x, double t, Scale s) {
    const std::size_t n = eig.size();
    check_site(x, n, "source");
    if (!(t >= 0.0)) throw InvalidArgument("time must be >= 0");
    const double st = scale_factor(s) * t;
    Eigen::VectorXd cr(n), ci(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = eig.vectors(x - 1, k);
        const double phase = eig.values(k) * st;
        cr(k) = w * std::cos(phase);
        ci(k) = -w * std::sin(phase);
    }
    const Eigen::VectorXd re = eig.vectors * cr;
    const Eigen::VectorXd im = eig.vectors * ci;
    AmplitudeRow row{x, t, s, std::vector<Complex>(n)};
    for (std::size_t y = 0; y < n; ++y) row.amplitudes[y] = {re(y), im(y)};
    return row;
}

std::vector<double> outside_profile(const AmplitudeRow& row) {
    const std::size_t n = row.amplitudes.size();
    std::vector<double> p(n + 1, 0.0);
    // accumulate from the far end so small tails are not swamped
    for (std::size_t x = n; x-- > 0;) p[x] = p[x + 1] + std::norm(row.amplitudes[x]);
    return p;
}

double outside_probability(const EigenSystem& eig, std::size_t x, double t) {
    if (t == 0.0) return x >= 1 ? 0.0 : 1.0;
    const auto row = amplitude_row(eig, 1, t, Scale::transport);
    const auto p = outside_profile(row);
    return x >= p.size() ? 0.0 : std::min(1.0, p[x]);
}

std::vector<double> tail_profile(const AmplitudeRow& row) {
    const std::size_t n = row.amplitudes.size();
    std::vector<double> tails(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) tails[j] = tails[j + 1] + std::abs(row.amplitudes[j]);
    return tails;
}

double tail_sum(const EigenSystem& eig, std::size_t x, std::size_t x_prime, double t) {
    const std::size_t n = eig.size();
    check_site(x, n, "x");
    check_site(x_prime, n, "x'");
    if (!(x < x_prime)) throw InvalidArgument("tail_sum requires x < x'");
    const auto row = amplitude_row(eig, x, t, Scale::fermion);
    return tail_profile(row)[x_prime - 1];
}

Complex resolvent_element(const OneBodyOperator& op, Complex z, std::size_t x, std::size_t y) {
    const std::size_t n = op.size();
    check_site(x, n, "x");
    check_site(y, n, "y");
    constexpr double near = 1e-8;
    if (std::abs(z.imag()) < near) {
        const double r = std::sqrt(near * near - z.imag() * z.imag());
        if (op.count_below(z.real() + r) != op.count_below(z.real() - r))
            throw NumericalError("resolvent requested within 1e-8 of the spectrum");
    }
    const auto u = solve_shifted(op.diagonal(), 1.0, z, y);
    // residual check of (h - z) u = delta_y
    double res = 0.0, nrm = 0.0;
    const auto diag = op.diagonal();
    for (std::size_t i = 0; i < n; ++i) {
        Complex r = (diag[i] - z) * u[i];
        if (i > 0) r += u[i - 1];
        if (i + 1 < n) r += u[i + 1];
        if (i == y - 1) r -= 1.0;
        res = std::max(res, std::abs(r));
        nrm = std::max(nrm, std::abs(u[i]));
    }
    if (res > 1e-10 * std::max(nrm, 1.0))
        throw NumericalError("resolvent solve residual " + std::to_string(res) + " too large");
    return u[x - 1];
}

Complex dunford_amplitude(const OneBodyOperator& op, std::size_t x, std::size_t y, double t,
                          const DunfordOptions& options) {
    const std::size_t n = op.size();
    check_site(x, n, "x");
    check_site(y, n, "y");
    if (!(options.margin > 0.0)) throw InvalidArgument("contour margin must be positive");
    if (options.points < 64) throw InvalidArgument("contour needs at least 64 quadrature points");

    // spectrum of 2h lies in [-2r, 2r]
    const double half_width = 2.0 * op.spectral_radius_bound() + options.margin;
    const double half_height = options.margin;
    const std::array<Complex, 4> corners{Complex{-half_width, -half_height},
                                         Complex{half_width, -half_height},
                                         Complex{half_width, half_height},
                                         Complex{-half_width, half_height}};
    const double perimeter = 4.0 * (half_width + half_height);

    Complex sum = 0.0;
    for (int side = 0; side < 4; ++side) {
        const Complex a = corners[side];
        const Complex delta = corners[(side + 1) % 4] - a;
        const int m = std::max(16, static_cast<int>(std::lround(options.points * std::abs(delta) /
                                                                 perimeter)));
        // u -> u - sin(2 pi u)/(2 pi) flattens the integrand at the corners
        for (int j = 1; j < m; ++j) {
            const double u = static_cast<double>(j) / m;
            const double phi = u - std::sin(2.0 * std::numbers::pi * u) / (2.0 * std::numbers::pi);
            const double dphi = 1.0 - std::cos(2.0 * std::numbers::pi * u);
            const Complex z = a + delta * phi;
            const auto g = solve_shifted(op.diagonal(), 2.0, z, y);
            sum += std::exp(Complex{0.0, -t} * z) * g[x - 1] * delta * dphi / static_cast<double>(m);
        }
    }
    return -sum / Complex{0.0, 2.0 * std::numbers::pi};
}

Complex dunford_amplitude_checked(const OneBodyOperator& op, std::size_t x, std::size_t y,
                                  double t, const DunfordOptions& options, double tolerance) {
    if (options.points < 128) throw InvalidArgument("checked contour needs at least 128 points");
    DunfordOptions coarse = options;
    coarse.points = options.points / 2;
    const Complex fine = dunford_amplitude(op, x, y, t, options);
    const Complex rough = dunford_amplitude(op, x, y, t, coarse);
    if (std::abs(fine - rough) > tolerance)
        throw NumericalError("contour quadrature did not converge at " +
                             std::to_string(options.points) + " points");
    return fine;
}

double TransferMatrix::norm() const {
    // largest singular value of a 2x2 matrix
    const double a = m[0], b = m[1], c = m[2], d = m[3];
    const double s = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
    return std::sqrt(0.5 * (s + disc));
}

std::array<double, 2> TransferMatrix::apply(std::array<double, 2> v) const {
    return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]};
}

TransferMatrix transfer_matrix(std::span<const double> field, double energy, std::size_t a,
                               std::size_t b) {
    if (a < 1 || a > b || b > field.size())
        throw InvalidArgument("transfer matrix needs 1 <= a <= b <= N");
    TransferMatrix t;
    t.energy = energy;
    t.first = a;
    t.last = b;
    double p = 1.0, q = 0.0, r = 0.0, s = 1.0;
    for (std::size_t x = a; x <= b; ++x) {
        const double e = energy - field[x - 1];
        // [[e, -1], [1, 0]] * [[p, q], [r, s]]
        const double np = e * p - r, nq = e * q - s;
        r = p;
        s = q;
        p = np;
        q = nq;
    }
    t.m = {p, q, r, s};
    return t;
}

TransferMatrix transfer_matrix(const Field& field, double energy, std::size_t a, std::size_t b) {
    return transfer_matrix(field.values(), energy, a, b);
}

}  // namespace lrcone
