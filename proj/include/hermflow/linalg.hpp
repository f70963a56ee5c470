#pragma once

#include <functional>
#include <vector>

namespace hermflow {

// Banded LU with partial pivoting (LAPACK-style band storage).
class BandedLU {
public:
    BandedLU(int n, int kl, int ku);

    // Assembly access; (i, j) must satisfy -kl <= j - i <= ku.
    double& at(int i, int j);

    void factor();
    void solve(std::vector<double>& b) const;

    int size() const { return n_; }

private:
    int n_, kl_, ku_, ldab_;
    std::vector<double> ab_;
    std::vector<int> ipiv_;
    bool factored_ = false;
};

// Dense LU with partial pivoting, for small systems.
class DenseLU {
public:
    DenseLU(std::vector<double> a, int n); // row-major n x n, factored eagerly
    void solve(std::vector<double>& b) const;

private:
    int n_;
    std::vector<double> a_;
    std::vector<int> ipiv_;
};

using LinOp = std::function<void(const std::vector<double>&, std::vector<double>&)>;

struct GmresResult {
    int iterations = 0;
    double relres = 0.0;
    bool converged = false;
};

// Left-preconditioned restarted GMRES; precond may be empty.
GmresResult gmres(const LinOp& apply, const LinOp& precond, const std::vector<double>& b,
                  std::vector<double>& x, int restart, int maxit, double rtol);

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// p in [0, 1]; interpolated quantile of a copy of v.
double percentile(std::vector<double> v, double p);

} // namespace hermflow
