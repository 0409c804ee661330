#pragma once

// Dense 2^N oracle for the XY chain
//   H = -sum_x (s1_x s1_{x+1} + s2_x s2_{x+1}) + sum_x h_x s3_x
// with s3 = diag(1, -1) and site 1 as the leftmost Kronecker factor.

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "lrcone/onebody.hpp"
#include "lrcone/potentials.hpp"

namespace lrcone {

inline constexpr std::size_t kMaxDenseSites = 12;

struct DenseOperator {
    std::size_t sites = 0;
    Eigen::MatrixXcd matrix;

    Eigen::Index dimension() const { return matrix.rows(); }
};

enum class Pauli { x = 1, y = 2, z = 3 };

Eigen::Matrix2cd pauli(Pauli which);
Eigen::Matrix2cd lowering();  // S^- = (s1 - i s2)/2 = [[0,0],[1,0]]
Eigen::Matrix2cd raising();   // S^+

/// Embeds a single-site 2x2 operator at site x (1-based) of an N-site chain.
DenseOperator site_operator(const Eigen::Matrix2cd& op, std::size_t x, std::size_t sites);
DenseOperator identity_operator(std::size_t sites);

DenseOperator build_hamiltonian(const Field& field);

/// c_x = s3_1 ... s3_{x-1} S^-_x
DenseOperator jordan_wigner_c(std::size_t x, std::size_t sites);

/// Caches the eigendecomposition of a Hermitian H so A(t) = e^{itH} A e^{-itH} is two
/// basis changes and a phase twist.
class HeisenbergEvolution {
public:
    explicit HeisenbergEvolution(const DenseOperator& hamiltonian);

    DenseOperator evolve(const DenseOperator& a, double t) const;
    std::size_t sites() const { return sites_; }

private:
    std::size_t sites_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd basis_;
};

DenseOperator heisenberg(const DenseOperator& a, const DenseOperator& h, double t);

/// Spectral norm. When all but a 1e-12 (relative Frobenius) share of the matrix changes the
/// number of up spins by one fixed amount, the norm is taken block by block over that grading.
double operator_norm(const Eigen::MatrixXcd& m);
double operator_norm(const DenseOperator& a);
/// Spectral norm of AB - BA.
double commutator_norm(const DenseOperator& a, const DenseOperator& b);
/// Spectral norm of [A, b_x] for a single-site operator b at site x, without forming b_x.
double commutator_norm(const DenseOperator& a, const Eigen::Matrix2cd& local, std::size_t x);

struct FreeDynamicsReport {
    std::size_t sites = 0;
    double time = 0.0;
    /// max_x || c_x(t) - sum_y K_{xy}(2t) c_y ||_max. With s3 = diag(1, -1) and the string
    /// convention above, H = 2 c^dag h_N c - sum_x h_x, so no extra hopping-sign gauge enters.
    double max_entrywise_deviation = 0.0;
    /// max_{x, x'} | ||[c_x(t), s3_x']|| - 2 |K_{x,x'}(2t)| |
    double max_gauge_invariant_deviation = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// Compares the dense fermion dynamics with the one-body propagator e^{-2iht}. Only the
/// gauge-invariant magnitude check decides `passed`.
FreeDynamicsReport verify_free_dynamics(const Field& field, double t, double tolerance = 1e-8);

/// Random Hermitian 2x2 matrix with entries drawn from a seeded mt19937_64.
Eigen::Matrix2cd random_hermitian(std::uint64_t seed);

struct BoundCheck {
    std::size_t checks = 0;
    std::size_t violations = 0;
    /// largest dense / bound ratio seen (bounds with value 0 are skipped in the ratio)
    double worst_ratio = 0.0;
};

/// Dense commutator norms against the one-body bounds at one (field, t), all pairs x < x'
/// (the lower bound and identity use all pairs x, x'). B ranges over s3, S^+, S^- and a
/// random Hermitian matrix at x'.
struct BoundChainReport {
    std::size_t sites = 0;
    double time = 0.0;
    double tolerance = 0.0;
    /// max | ||[c_x(t), s3_x']|| - 2 |K_{x,x'}(2t)| |
    double identity_deviation = 0.0;
    /// max || c_x(t) - sum_y K_{xy}(2t) c_y ||_max
    double entrywise_deviation = 0.0;
    /// ||[S^-_x(t), B]|| <= spin_bound_jw * ||B|| + tol
    BoundCheck spin;
    /// ||[c_x(t), B]|| <= ||B|| sum_{y >= x'} |K_{xy}| + tol
    BoundCheck fermion;
    /// ||[c_x(t), B]|| <= 2 ||B|| sum_{y >= x'} |K_{xy}| + tol
    BoundCheck fermion_doubled;
    /// ||[c_x(t), S^+_x']|| >= |K_{x,x'}(2t)| - tol
    BoundCheck lower;
    /// the spin and single-tail fermion checks split by B, in the order s3, S^+, S^-, random
    std::array<BoundCheck, 4> spin_by_observable;
    std::array<BoundCheck, 4> fermion_by_observable;
    /// max over x < x' of | sum_{y >= x'} |tr(c_y^dag c_x(t))| / 2^{N-1} - tail_sum |
    double tail_deviation = 0.0;
};

BoundChainReport bound_chain(const Field& field, double t, double tolerance = 1e-8, std::uint64_t seed = 7);

/// max |{c_x, c_y^dag} - delta_xy| and |{c_x, c_y}| entries over all pairs.
double car_deviation(std::size_t sites);

}  // namespace lrcone
