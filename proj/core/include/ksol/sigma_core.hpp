#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ksol {

// Exact binomial coefficient, valid for n <= 64.
std::uint64_t binomial(int n, int r);

// Elementary symmetric polynomial sigma_k of the entries (1 <= k <= size).
double sigma_k(std::span<const double> lambda, int k);

// Same quantity by summing over all k-subsets. Size limited to 20.
double sigma_k_by_subsets(std::span<const double> lambda, int k);

// sigma_0..sigma_kmax in one pass; element 0 is 1.
std::vector<double> sigma_all(std::span<const double> lambda, int kmax);

// Diagonal of the Newton tensor T_k in the eigenbasis: sigma_k(lambda | i).
std::vector<double> newton_tensor_diag(std::span<const double> lambda, int k);

// sigma_1..sigma_k all strictly positive.
bool in_positive_cone(std::span<const double> lambda, int k);

// lambda1 has multiplicity 1, lambda2 has multiplicity n - 1.
struct RadialEigenPair {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int n = 0;
    int k = 0;

    std::vector<double> expand() const;
};

// Eigenvalues lambda with sigma_k(g) = u^{-(1-m)k} sigma_k(lambda) for g = u^{1-m}|dx|^2,
// m = (n-2k)/(n+2k), from radial data at r > 0.
RadialEigenPair radial_schouten_eigenvalues(double u, double u_r, double u_rr, double r, int n, int k);

double radial_sigma_l(const RadialEigenPair& pair, int l);

bool is_admissible_radial(const RadialEigenPair& pair);

}  // namespace ksol
