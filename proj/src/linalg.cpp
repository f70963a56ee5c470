#include "hermflow/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "hermflow/errors.hpp"

namespace hermflow {

BandedLU::BandedLU(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(n) * ldab_, 0.0), ipiv_(n, 0) {}

double& BandedLU::at(int i, int j) {
    return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
}

void BandedLU::factor() {
    const int kv = kl_ + ku_; // working upper bandwidth
    auto A = [&](int i, int j) -> double& {
        return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
    };
    for (int j = 0; j < n_; ++j) {
        const int ilast = std::min(j + kl_, n_ - 1);
        int p = j;
        double pmax = std::abs(A(j, j));
        for (int i = j + 1; i <= ilast; ++i) {
            const double v = std::abs(A(i, j));
            if (v > pmax) {
                pmax = v;
                p = i;
            }
        }
        ipiv_[j] = p;
        if (pmax == 0.0) throw SolverFailure("banded LU: zero pivot");
        const int jlast = std::min(j + kv, n_ - 1);
        if (p != j)
            for (int jj = j; jj <= jlast; ++jj) std::swap(A(j, jj), A(p, jj));
        const double piv = A(j, j);
        for (int i = j + 1; i <= ilast; ++i) {
            const double l = A(i, j) / piv;
            A(i, j) = l;
            for (int jj = j + 1; jj <= jlast; ++jj) A(i, jj) -= l * A(j, jj);
        }
    }
    factored_ = true;
}

void BandedLU::solve(std::vector<double>& b) const {
    if (!factored_) throw SolverFailure("banded LU: solve before factor");
    auto A = [&](int i, int j) -> double {
        return ab_[static_cast<std::size_t>(j) * ldab_ + (kl_ + ku_ + i - j)];
    };
    const int kv = kl_ + ku_;
    // the banded factorization alternates permutations and eliminations
    // (the stored multipliers are not globally row-swapped), so the solve
    // interleaves them in the same order
    for (int j = 0; j < n_; ++j) {
        if (ipiv_[j] != j) std::swap(b[j], b[ipiv_[j]]);
        const int ilast = std::min(j + kl_, n_ - 1);
        for (int i = j + 1; i <= ilast; ++i) b[i] -= A(i, j) * b[j];
    }
    for (int j = n_ - 1; j >= 0; --j) {
        b[j] /= A(j, j);
        const int ifirst = std::max(0, j - kv);
        for (int i = ifirst; i < j; ++i) b[i] -= A(i, j) * b[j];
    }
}

DenseLU::DenseLU(std::vector<double> a, int n) : n_(n), a_(std::move(a)), ipiv_(n, 0) {
    for (int k = 0; k < n_; ++k) {
        int p = k;
        double pmax = std::abs(a_[static_cast<std::size_t>(k) * n_ + k]);
        for (int i = k + 1; i < n_; ++i) {
            const double v = std::abs(a_[static_cast<std::size_t>(i) * n_ + k]);
            if (v > pmax) {
                pmax = v;
                p = i;
            }
        }
        ipiv_[k] = p;
        if (pmax == 0.0) throw SolverFailure("dense LU: singular matrix");
        if (p != k)
            for (int j = 0; j < n_; ++j)
                std::swap(a_[static_cast<std::size_t>(k) * n_ + j], a_[static_cast<std::size_t>(p) * n_ + j]);
        const double piv = a_[static_cast<std::size_t>(k) * n_ + k];
        for (int i = k + 1; i < n_; ++i) {
            const double l = a_[static_cast<std::size_t>(i) * n_ + k] / piv;
            a_[static_cast<std::size_t>(i) * n_ + k] = l;
            for (int j = k + 1; j < n_; ++j)
                a_[static_cast<std::size_t>(i) * n_ + j] -= l * a_[static_cast<std::size_t>(k) * n_ + j];
        }
    }
}

void DenseLU::solve(std::vector<double>& b) const {
    for (int k = 0; k < n_; ++k)
        if (ipiv_[k] != k) std::swap(b[k], b[ipiv_[k]]);
    for (int k = 0; k < n_; ++k)
        for (int i = k + 1; i < n_; ++i) b[i] -= a_[static_cast<std::size_t>(i) * n_ + k] * b[k];
    for (int i = n_ - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n_; ++j) s -= a_[static_cast<std::size_t>(i) * n_ + j] * b[j];
        b[i] = s / a_[static_cast<std::size_t>(i) * n_ + i];
    }
}

static double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

static double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

GmresResult gmres(const LinOp& apply, const LinOp& precond, const std::vector<double>& b,
                  std::vector<double>& x, int restart, int maxit, double rtol) {
    const std::size_t n = b.size();
    GmresResult res;
    std::vector<double> r(n), w(n), t(n);

    auto prec = [&](const std::vector<double>& in, std::vector<double>& out) {
        if (precond)
            precond(in, out);
        else
            out = in;
    };

    prec(b, t);
    const double bnorm = std::max(nrm2(t), 1e-300);

    int total = 0;
    while (total < maxit) {
        apply(x, w);
        for (std::size_t i = 0; i < n; ++i) w[i] = b[i] - w[i];
        prec(w, r);
        double beta = nrm2(r);
        res.relres = beta / bnorm;
        if (res.relres <= rtol) {
            res.converged = true;
            res.iterations = total;
            return res;
        }

        const int m = restart;
        std::vector<std::vector<double>> V;
        V.reserve(m + 1);
        std::vector<double> v0(n);
        for (std::size_t i = 0; i < n; ++i) v0[i] = r[i] / beta;
        V.push_back(std::move(v0));

        std::vector<double> H(static_cast<std::size_t>(m + 1) * m, 0.0);
        std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < m && total < maxit; ++k, ++total) {
            apply(V[k], w);
            prec(w, t);
            for (int j = 0; j <= k; ++j) {
                const double h = dot(t, V[j]);
                H[static_cast<std::size_t>(j) * m + k] = h;
                for (std::size_t i = 0; i < n; ++i) t[i] -= h * V[j][i];
            }
            double h1 = nrm2(t);
            H[static_cast<std::size_t>(k + 1) * m + k] = h1;
            if (h1 > 0.0) {
                std::vector<double> vk(n);
                for (std::size_t i = 0; i < n; ++i) vk[i] = t[i] / h1;
                V.push_back(std::move(vk));
            } else {
                V.push_back(std::vector<double>(n, 0.0));
            }
            for (int j = 0; j < k; ++j) {
                const double a = H[static_cast<std::size_t>(j) * m + k];
                const double c = H[static_cast<std::size_t>(j + 1) * m + k];
                H[static_cast<std::size_t>(j) * m + k] = cs[j] * a + sn[j] * c;
                H[static_cast<std::size_t>(j + 1) * m + k] = -sn[j] * a + cs[j] * c;
            }
            const double a = H[static_cast<std::size_t>(k) * m + k];
            const double c = H[static_cast<std::size_t>(k + 1) * m + k];
            const double rad = std::hypot(a, c);
            if (rad == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = a / rad;
                sn[k] = c / rad;
            }
            H[static_cast<std::size_t>(k) * m + k] = rad;
            H[static_cast<std::size_t>(k + 1) * m + k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            res.relres = std::abs(g[k + 1]) / bnorm;
            if (res.relres <= rtol) {
                ++k;
                ++total;
                break;
            }
        }
        // back-substitute y and update x
        std::vector<double> y(k, 0.0);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= H[static_cast<std::size_t>(i) * m + j] * y[j];
            y[i] = s / H[static_cast<std::size_t>(i) * m + i];
        }
        for (int j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) x[i] += y[j] * V[j][i];
        if (res.relres <= rtol) {
            res.converged = true;
            res.iterations = total;
            return res;
        }
    }
    res.iterations = total;
    return res;
}

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    LinFit f;
    if (std::abs(den) < 1e-300) {
        f.slope = 0.0;
        f.intercept = n ? sy / n : 0.0;
    } else {
        f.slope = (n * sxy - sx * sy) / den;
        f.intercept = (sy - f.slope * sx) / n;
    }
    return f;
}

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

} // namespace hermflow
