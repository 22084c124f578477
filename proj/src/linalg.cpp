#include "mstates/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mstates/error.hpp"

namespace mstates {

namespace {

class Basis {
public:
    Basis(Eigen::Index n, Eigen::Index cap, bool deflate) : q_(n, cap), deflate_(deflate), n_(n) {}

    Eigen::Index size() const { return size_; }
    const Eigen::MatrixXd& q() const { return q_; }
    auto col(Eigen::Index j) const { return q_.col(j); }
    void reset() { size_ = 0; }

    // Classical Gram-Schmidt applied twice.
    void orthogonalize(Eigen::VectorXd& w) const {
        for (int pass = 0; pass < 2; ++pass) {
            if (deflate_) w.array() -= w.mean();
            if (size_ > 0) w -= q_.leftCols(size_) * (q_.leftCols(size_).transpose() * w);
        }
    }
    void push(const Eigen::VectorXd& v) { q_.col(size_++) = v; }
    Eigen::Index available() const { return deflate_ ? n_ - 1 : n_; }

private:
    Eigen::MatrixXd q_;
    Eigen::Index size_ = 0;
    bool deflate_;
    Eigen::Index n_;
};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    return v;
}

}  // namespace

TopEigen top_eigenpairs(const Eigen::MatrixXd& a, int k, const TopEigenOptions& options) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || n == 0) throw NumericError("top_eigenpairs: matrix must be square and nonempty");
    if (k < 1) throw NumericError("top_eigenpairs: k must be >= 1");

    const Eigen::Index avail = options.deflate_constant ? n - 1 : n;
    if (avail < k) throw NumericError("top_eigenpairs: not enough dimensions for the requested eigenpairs");
    const Eigen::Index cap = std::min<Eigen::Index>(std::max<Eigen::Index>(options.max_basis, 2 * k + 1), avail);

    std::mt19937_64 rng(options.seed);
    Basis basis(n, cap, options.deflate_constant);
    const double scale = std::max(a.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);

    TopEigen out;
    Eigen::VectorXd start = random_vector(n, rng);
    std::vector<double> alpha, beta;

    while (true) {
        basis.reset();
        alpha.clear();
        beta.clear();
        basis.orthogonalize(start);
        if (start.norm() == 0.0) {
            start = random_vector(n, rng);
            basis.orthogonalize(start);
        }
        basis.push(start.normalized());

        bool exhausted = false;
        Eigen::VectorXd ritz_values;
        Eigen::MatrixXd ritz_coeffs;
        bool done = false;
        for (;;) {
            const Eigen::Index j = basis.size() - 1;
            Eigen::VectorXd w = a * basis.col(j);
            ++out.iterations;
            alpha.push_back(basis.col(j).dot(w));
            basis.orthogonalize(w);
            double b = w.norm();

            const Eigen::Index m = basis.size();
            bool space_full = m == cap;
            if (b <= 1e-12 * scale) {
                // Invariant subspace: continue with a fresh direction if any remain.
                if (m == avail) {
                    exhausted = true;
                } else if (!space_full) {
                    Eigen::VectorXd fresh = random_vector(n, rng);
                    basis.orthogonalize(fresh);
                    if (fresh.norm() <= 1e-10) {
                        exhausted = true;
                    } else {
                        w = fresh;
                        b = 0.0;
                    }
                }
            }

            const bool check = m >= k && (m < 50 || m % 10 == 0 || space_full || exhausted ||
                                          out.iterations >= options.max_iterations);
            if (check) {
                Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
                Eigen::VectorXd sub = m > 1 ? Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1) : Eigen::VectorXd();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
                tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
                if (tri.info() != Eigen::Success) throw NumericError("top_eigenpairs: tridiagonal solve failed");
                ritz_values = tri.eigenvalues().tail(k).reverse();
                ritz_coeffs = tri.eigenvectors().rightCols(k).rowwise().reverse();
                const double ref = std::max(ritz_values.cwiseAbs().maxCoeff(), 1e-300);
                bool ok = true;
                const double coupling = exhausted ? 0.0 : b;
                for (int i = 0; i < k; ++i) {
                    if (std::abs(coupling * ritz_coeffs(m - 1, i)) > options.tolerance * ref) ok = false;
                }
                if (ok || exhausted) {
                    done = true;
                    break;
                }
                if (space_full || out.iterations >= options.max_iterations) break;
            }
            if (exhausted) {
                done = true;
                break;
            }
            if (space_full) break;
            beta.push_back(b);
            basis.push(w / (b > 0.0 ? b : w.norm()));
        }

        const Eigen::Index m = basis.size();
        if (ritz_values.size() == 0) {
            Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
            Eigen::VectorXd sub = m > 1 ? Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1) : Eigen::VectorXd();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            ritz_values = tri.eigenvalues().tail(k).reverse();
            ritz_coeffs = tri.eigenvectors().rightCols(k).rowwise().reverse();
        }
        out.values = ritz_values;
        out.vectors = basis.q().leftCols(m) * ritz_coeffs;
        for (int i = 0; i < k; ++i) out.vectors.col(i).normalize();
        if (done) {
            out.converged = true;
            return out;
        }
        if (out.iterations >= options.max_iterations) return out;
        start = out.vectors.rowwise().sum();
    }
}

}  // namespace mstates
