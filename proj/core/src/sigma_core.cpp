#include "ksol/sigma_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ksol/errors.hpp"

namespace ksol {

std::uint64_t binomial(int n, int r) {
    if (n < 0 || n > 64) throw DomainError("binomial: n must lie in [0, 64], got " + std::to_string(n));
    if (r < 0 || r > n) return 0;
    if (r > n - r) r = n - r;
    unsigned __int128 acc = 1;
    for (int i = 0; i < r; ++i) acc = acc * static_cast<unsigned>(n - i) / static_cast<unsigned>(i + 1);
    return static_cast<std::uint64_t>(acc);
}

namespace {

void check_order(std::span<const double> lambda, int k, const char* who) {
    if (k < 1 || static_cast<std::size_t>(k) > lambda.size())
        throw DomainError(std::string(who) + ": need 1 <= k <= " + std::to_string(lambda.size()) + ", got k = " +
                          std::to_string(k));
}

}  // namespace

std::vector<double> sigma_all(std::span<const double> lambda, int kmax) {
    std::vector<double> e(static_cast<std::size_t>(kmax) + 1, 0.0);
    e[0] = 1.0;
    int seen = 0;
    for (double v : lambda) {
        ++seen;
        for (int j = std::min(seen, kmax); j >= 1; --j) e[j] += v * e[j - 1];
    }
    return e;
}

double sigma_k(std::span<const double> lambda, int k) {
    check_order(lambda, k, "sigma_k");
    return sigma_all(lambda, k)[k];
}

double sigma_k_by_subsets(std::span<const double> lambda, int k) {
    check_order(lambda, k, "sigma_k_by_subsets");
    const std::size_t n = lambda.size();
    if (n > 20) throw DomainError("sigma_k_by_subsets: enumeration limited to 20 entries");
    double total = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != k) continue;
        double prod = 1.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= lambda[i];
        total += prod;
    }
    return total;
}

std::vector<double> newton_tensor_diag(std::span<const double> lambda, int k) {
    const int n = static_cast<int>(lambda.size());
    if (k < 0 || k > n - 1)
        throw DomainError("newton_tensor_diag: need 0 <= k <= n - 1, got k = " + std::to_string(k));
    std::vector<double> out(lambda.size());
    std::vector<double> rest;
    rest.reserve(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        rest.clear();
        for (std::size_t j = 0; j < lambda.size(); ++j)
            if (j != i) rest.push_back(lambda[j]);
        out[i] = sigma_all(rest, k)[k];
    }
    return out;
}

bool in_positive_cone(std::span<const double> lambda, int k) {
    check_order(lambda, k, "in_positive_cone");
    auto e = sigma_all(lambda, k);
    for (int j = 1; j <= k; ++j)
        if (!(e[j] > 0.0)) return false;
    return true;
}

std::vector<double> RadialEigenPair::expand() const {
    std::vector<double> out(static_cast<std::size_t>(n), lambda2);
    if (n > 0) out[0] = lambda1;
    return out;
}

RadialEigenPair radial_schouten_eigenvalues(double u, double u_r, double u_rr, double r, int n, int k) {
    if (!(u > 0.0)) throw DomainError("radial_schouten_eigenvalues: u must be positive");
    if (!(r > 0.0)) throw DomainError("radial_schouten_eigenvalues: r must be positive");
    if (n < 3 || k < 1 || k > n) throw DomainError("radial_schouten_eigenvalues: need n >= 3 and 1 <= k <= n");
    const double m = static_cast<double>(n - 2 * k) / (n + 2 * k);
    const double half = (1.0 - m) / 2.0;
    const double g = u_r / u;
    RadialEigenPair out;
    out.n = n;
    out.k = k;
    out.lambda1 = -half * (u_rr / u - (5.0 - m) / 4.0 * g * g);
    out.lambda2 = -half * g * (1.0 / r + (1.0 - m) / 4.0 * g);
    return out;
}

double radial_sigma_l(const RadialEigenPair& pair, int l) {
    if (l < 1 || l > pair.n) throw DomainError("radial_sigma_l: need 1 <= l <= n");
    const double c1 = static_cast<double>(binomial(pair.n - 1, l - 1));
    const double c2 = static_cast<double>(binomial(pair.n - 1, l));
    return std::pow(pair.lambda2, l - 1) * (c1 * pair.lambda1 + c2 * pair.lambda2);
}

// For k >= 2 the cone condition is sigma_k > 0 together with lambda2 > 0.
// For k = 1 the cone is only sigma_1 > 0, lambda2 may have either sign.
bool is_admissible_radial(const RadialEigenPair& pair) {
    if (pair.k < 1 || pair.k > pair.n) throw DomainError("is_admissible_radial: need 1 <= k <= n");
    const double s = radial_sigma_l(pair, pair.k);
    if (pair.k == 1) return s > 0.0;
    return s > 0.0 && pair.lambda2 > 0.0;
}

}  // namespace ksol
