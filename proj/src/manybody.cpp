#include "lrcone/manybody.hpp"

#include "lrcone/lrbounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

namespace lrcone {

namespace {

void check_sites(std::size_t sites) {
    if (sites < 1 || sites > kMaxDenseSites)
        throw InvalidArgument("dense oracle supports 1 <= N <= " + std::to_string(kMaxDenseSites) +
                              ", got " + std::to_string(sites));
}

Eigen::Index dim_of(std::size_t sites) { return Eigen::Index{1} << sites; }

// Bit for site x in a basis index; site 1 is the most significant (leftmost factor).
std::size_t bit_of(std::size_t x, std::size_t sites) { return sites - x; }

}  // namespace

Eigen::Matrix2cd pauli(Pauli which) {
    using C = std::complex<double>;
    Eigen::Matrix2cd m;
    switch (which) {
        case Pauli::x: m << 0, 1, 1, 0; break;
        case Pauli::y: m << 0, C{0, -1}, C{0, 1}, 0; break;
        case Pauli::z: m << 1, 0, 0, -1; break;
    }
    return m;
}

Eigen::Matrix2cd lowering() {
    Eigen::Matrix2cd m;
    m << 0, 0, 1, 0;
    return m;
}

Eigen::Matrix2cd raising() { return lowering().adjoint(); }

DenseOperator identity_operator(std::size_t sites) {
    check_sites(sites);
    return {sites, Eigen::MatrixXcd::Identity(dim_of(sites), dim_of(sites))};
}

DenseOperator site_operator(const Eigen::Matrix2cd& op, std::size_t x, std::size_t sites) {
    check_sites(sites);
    if (x < 1 || x > sites) throw std::out_of_range("site outside [1, N]");
    const Eigen::Index dim = dim_of(sites);
    const std::size_t bit = bit_of(x, sites);
    DenseOperator out{sites, Eigen::MatrixXcd::Zero(dim, dim)};
    // local state 0 is spin up (s3 = +1)
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int local_in = static_cast<int>((col >> bit) & 1);
        for (int local_out = 0; local_out < 2; ++local_out) {
            const auto v = op(local_out, local_in);
            if (v == 0.0) continue;
            const Eigen::Index row =
                (col & ~(Eigen::Index{1} << bit)) | (Eigen::Index{local_out} << bit);
            out.matrix(row, col) += v;
        }
    }
    return out;
}

DenseOperator build_hamiltonian(const Field& field) {
    const std::size_t n = field.size();
    check_sites(n);
    const Eigen::Index dim = dim_of(n);
    DenseOperator h{n, Eigen::MatrixXcd::Zero(dim, dim)};
    const auto s1 = pauli(Pauli::x), s2 = pauli(Pauli::y), s3 = pauli(Pauli::z);
    for (std::size_t x = 1; x < n; ++x) {
        h.matrix -= site_operator(s1, x, n).matrix * site_operator(s1, x + 1, n).matrix;
        h.matrix -= site_operator(s2, x, n).matrix * site_operator(s2, x + 1, n).matrix;
    }
    for (std::size_t x = 1; x <= n; ++x) h.matrix += field.at(x) * site_operator(s3, x, n).matrix;
    return h;
}

DenseOperator jordan_wigner_c(std::size_t x, std::size_t sites) {
    check_sites(sites);
    if (x < 1 || x > sites) throw std::out_of_range("Jordan-Wigner site outside [1, N]");
    DenseOperator c = site_operator(lowering(), x, sites);
    for (std::size_t y = 1; y < x; ++y) c.matrix = site_operator(pauli(Pauli::z), y, sites).matrix * c.matrix;
    return c;
}

HeisenbergEvolution::HeisenbergEvolution(const DenseOperator& hamiltonian)
    : sites_(hamiltonian.sites) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hamiltonian.matrix);
    if (solver.info() != Eigen::Success) throw NumericalError("dense Hamiltonian diagonalization failed");
    energies_ = solver.eigenvalues();
    basis_ = solver.eigenvectors();
}

DenseOperator HeisenbergEvolution::evolve(const DenseOperator& a, double t) const {
    if (a.matrix.rows() != basis_.rows()) throw InvalidArgument("operator and Hamiltonian shapes differ");
    // in the eigenbasis: A(t)_{jk} = e^{i t (E_j - E_k)} A_{jk}
    Eigen::MatrixXcd m = basis_.adjoint() * a.matrix * basis_;
    const Eigen::Index dim = m.rows();
    Eigen::VectorXcd phase(dim);
    for (Eigen::Index j = 0; j < dim; ++j) phase(j) = std::polar(1.0, t * energies_(j));
    m = phase.asDiagonal() * m * phase.conjugate().asDiagonal();
    return {a.sites, basis_ * m * basis_.adjoint()};
}

DenseOperator heisenberg(const DenseOperator& a, const DenseOperator& h, double t) {
    if (a.matrix.rows() != h.matrix.rows()) throw InvalidArgument("operator and Hamiltonian shapes differ");
    return HeisenbergEvolution(h).evolve(a, t);
}

namespace {

double dense_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::MatrixXcd gram;
    if (m.rows() >= m.cols()) gram = m.adjoint() * m;
    else gram = m * m.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

int up_count(Eigen::Index basis, int bits) {
    // local state 0 is spin up
    return bits - std::popcount(static_cast<unsigned long long>(basis));
}

}  // namespace

double operator_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    const Eigen::Index dim = m.rows();
    if (m.cols() != dim || dim < 4 || (dim & (dim - 1)) != 0) return dense_norm(m);
    const int bits = std::countr_zero(static_cast<unsigned long long>(dim));

    std::vector<double> shift_mass(2 * bits + 1, 0.0);
    for (Eigen::Index col = 0; col < dim; ++col)
        for (Eigen::Index row = 0; row < dim; ++row)
            shift_mass[up_count(row, bits) - up_count(col, bits) + bits] += std::norm(m(row, col));
    const auto top = std::max_element(shift_mass.begin(), shift_mass.end());
    double total = 0.0;
    for (double w : shift_mass) total += w;
    if (total == 0.0) return 0.0;
    if (total - *top > 1e-24 * total) return dense_norm(m);

    const int shift = static_cast<int>(top - shift_mass.begin()) - bits;
    std::vector<std::vector<Eigen::Index>> sector(bits + 1);
    for (Eigen::Index b = 0; b < dim; ++b) sector[up_count(b, bits)].push_back(b);
    double norm = 0.0;
    for (int n = 0; n <= bits; ++n) {
        const int target = n + shift;
        if (target < 0 || target > bits) continue;
        const auto& cols = sector[n];
        const auto& rows = sector[target];
        Eigen::MatrixXcd block(rows.size(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j)
            for (std::size_t i = 0; i < rows.size(); ++i) block(i, j) = m(rows[i], cols[j]);
        norm = std::max(norm, dense_norm(block));
    }
    return norm;
}

double operator_norm(const DenseOperator& a) { return operator_norm(a.matrix); }

double commutator_norm(const DenseOperator& a, const DenseOperator& b) {
    if (a.matrix.rows() != b.matrix.rows()) throw InvalidArgument("commutator of mismatched shapes");
    return operator_norm(Eigen::MatrixXcd(a.matrix * b.matrix - b.matrix * a.matrix));
}

double commutator_norm(const DenseOperator& a, const Eigen::Matrix2cd& local, std::size_t x) {
    check_sites(a.sites);
    if (x < 1 || x > a.sites) throw std::out_of_range("site outside [1, N]");
    const Eigen::Index dim = a.dimension();
    const Eigen::Index mask = Eigen::Index{1} << bit_of(x, a.sites);
    // (A b_x)(:, c) = sum_l A(:, c with bit l) b(l, bit of c); (b_x A)(r, :) likewise on rows
    Eigen::MatrixXcd comm(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int lc = (col & mask) ? 1 : 0;
        comm.col(col) = a.matrix.col(col & ~mask) * local(0, lc) + a.matrix.col(col | mask) * local(1, lc);
    }
    for (Eigen::Index row = 0; row < dim; ++row) {
        const int lr = (row & mask) ? 1 : 0;
        comm.row(row) -= local(lr, 0) * a.matrix.row(row & ~mask) + local(lr, 1) * a.matrix.row(row | mask);
    }
    return operator_norm(comm);
}

FreeDynamicsReport verify_free_dynamics(const Field& field, double t, double tolerance) {
    const std::size_t n = field.size();
    if (n > 8) throw InvalidArgument("verify_free_dynamics supports N <= 8");
    FreeDynamicsReport report;
    report.sites = n;
    report.time = t;
    report.tolerance = tolerance;

    const HeisenbergEvolution evolution(build_hamiltonian(field));
    const EigenSystem eig = eigensystem(build_operator(field));
    std::vector<DenseOperator> c;
    for (std::size_t x = 1; x <= n; ++x) c.push_back(jordan_wigner_c(x, n));
    const Eigen::Matrix2cd s3 = pauli(Pauli::z);

    for (std::size_t x = 1; x <= n; ++x) {
        const DenseOperator cx_t = evolution.evolve(c[x - 1], t);
        const AmplitudeRow row = amplitude_row(eig, x, t, Scale::fermion);
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(cx_t.dimension(), cx_t.dimension());
        for (std::size_t y = 1; y <= n; ++y) {
            rhs += row.amplitudes[y - 1] * c[y - 1].matrix;
        }
        report.max_entrywise_deviation =
            std::max(report.max_entrywise_deviation, (cx_t.matrix - rhs).cwiseAbs().maxCoeff());
        for (std::size_t xp = 1; xp <= n; ++xp) {
            const double dense = commutator_norm(cx_t, s3, xp);
            const double onebody = 2.0 * std::abs(row.amplitudes[xp - 1]);
            report.max_gauge_invariant_deviation =
                std::max(report.max_gauge_invariant_deviation, std::abs(dense - onebody));
        }
    }
    report.passed = report.max_gauge_invariant_deviation <= tolerance;
    return report;
}

Eigen::Matrix2cd random_hermitian(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::Matrix2cd m;
    const double a = normal(rng), d = normal(rng), re = normal(rng), im = normal(rng);
    m << a, std::complex<double>(re, -im), std::complex<double>(re, im), d;
    return m;
}

namespace {

// Coefficient of c_y in an operator that is linear in annihilators: tr(c_y^dag A) / 2^{N-1}.
Complex annihilator_coefficient(const DenseOperator& a, const DenseOperator& c_y) {
    const double scale = std::ldexp(1.0, -static_cast<int>(a.sites) + 1);
    return (c_y.matrix.adjoint() * a.matrix).trace() * scale;
}

void record(BoundCheck& check, double dense, double bound, double tolerance, bool upper) {
    ++check.checks;
    const bool ok = upper ? dense <= bound + tolerance : dense >= bound - tolerance;
    if (!ok) ++check.violations;
    if (bound > 0.0) check.worst_ratio = std::max(check.worst_ratio, dense / bound);
}

}  // namespace

BoundChainReport bound_chain(const Field& field, double t, double tolerance, std::uint64_t seed) {
    const std::size_t n = field.size();
    if (n > 8) throw InvalidArgument("bound_chain supports N <= 8");
    BoundChainReport r;
    r.sites = n;
    r.time = t;
    r.tolerance = tolerance;

    const HeisenbergEvolution evolution(build_hamiltonian(field));
    const EigenSystem eig = eigensystem(build_operator(field));
    std::vector<DenseOperator> c, ct, st;
    std::vector<AmplitudeRow> rows;
    for (std::size_t x = 1; x <= n; ++x) {
        c.push_back(jordan_wigner_c(x, n));
        st.push_back(evolution.evolve(site_operator(lowering(), x, n), t));
        rows.push_back(amplitude_row(eig, x, t, Scale::fermion));
    }
    for (std::size_t x = 1; x <= n; ++x) ct.push_back(evolution.evolve(c[x - 1], t));

    const Eigen::Matrix2cd s3 = pauli(Pauli::z);
    const Eigen::Matrix2cd sp = raising();
    // S^- enters so that ||[c_x(t)^dag, S^+]|| = ||[c_x(t), S^-]|| is covered as well
    std::vector<Eigen::Matrix2cd> observables = {s3, sp, lowering()};
    std::vector<double> observable_norms = {1.0, 1.0, 1.0};

    for (std::size_t x = 1; x <= n; ++x) {
        const auto& k = rows[x - 1].amplitudes;
        Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(ct[x - 1].dimension(), ct[x - 1].dimension());
        std::vector<Complex> a(n);
        for (std::size_t y = 1; y <= n; ++y) {
            rhs += k[y - 1] * c[y - 1].matrix;
            a[y - 1] = annihilator_coefficient(ct[x - 1], c[y - 1]);
        }
        r.entrywise_deviation = std::max(r.entrywise_deviation, (ct[x - 1].matrix - rhs).cwiseAbs().maxCoeff());

        for (std::size_t xp = 1; xp <= n; ++xp) {
            const double kxx = std::abs(k[xp - 1]);
            const double id = commutator_norm(ct[x - 1], s3, xp);
            r.identity_deviation = std::max(r.identity_deviation, std::abs(id - 2.0 * kxx));
            record(r.lower, commutator_norm(ct[x - 1], sp, xp), kxx, tolerance, false);
            if (xp <= x) continue;

            double tail = 0.0, dense_tail = 0.0;
            for (std::size_t y = xp; y <= n; ++y) {
                tail += std::abs(k[y - 1]);
                dense_tail += std::abs(a[y - 1]);
            }
            r.tail_deviation = std::max(r.tail_deviation, std::abs(dense_tail - tail));
            const double spin = spin_bound_jw(eig, x, xp, t);

            observables.resize(3);
            observable_norms.resize(3);
            const Eigen::Matrix2cd random = random_hermitian(seed + 1000 * x + xp);
            observables.push_back(random);
            observable_norms.push_back(operator_norm(Eigen::MatrixXcd(random)));
            for (std::size_t i = 0; i < observables.size(); ++i) {
                const double bn = observable_norms[i];
                const double spin_dense = commutator_norm(st[x - 1], observables[i], xp);
                record(r.spin, spin_dense, spin * bn, tolerance, true);
                record(r.spin_by_observable[i], spin_dense, spin * bn, tolerance, true);
                const double fermion = commutator_norm(ct[x - 1], observables[i], xp);
                record(r.fermion, fermion, tail * bn, tolerance, true);
                record(r.fermion_by_observable[i], fermion, tail * bn, tolerance, true);
                record(r.fermion_doubled, fermion, 2.0 * tail * bn, tolerance, true);
            }
        }
    }
    return r;
}

double car_deviation(std::size_t sites) {
    check_sites(sites);
    std::vector<DenseOperator> c;
    for (std::size_t x = 1; x <= sites; ++x) c.push_back(jordan_wigner_c(x, sites));
    const Eigen::Index dim = dim_of(sites);
    double worst = 0.0;
    for (std::size_t x = 0; x < sites; ++x) {
        for (std::size_t y = 0; y < sites; ++y) {
            const Eigen::MatrixXcd& cx = c[x].matrix;
            const Eigen::MatrixXcd& cy = c[y].matrix;
            Eigen::MatrixXcd mixed = cx * cy.adjoint() + cy.adjoint() * cx;
            if (x == y) mixed -= Eigen::MatrixXcd::Identity(dim, dim);
            const Eigen::MatrixXcd same = cx * cy + cy * cx;
            worst = std::max({worst, mixed.cwiseAbs().maxCoeff(), same.cwiseAbs().maxCoeff()});
        }
    }
    return worst;
}

}  // namespace lrcone
