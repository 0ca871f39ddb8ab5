// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// LAMP matrices and the LAMP selection problem
//
//     minimize ||q||_0   subject to   || |K| (1 - q) ||_inf <= tau,
//
// where K = diag(f(y))^-1 J_f(y) (unweighted) or K = diag(f(y))^-1 J_f(y) diag(y) (weighted)
// is frozen at the low-precision baseline y of the inner function g, and q selects the
// components of y that get recomputed in high precision before f is applied.
//
// All analysis arithmetic here is double precision. Only the inner function evaluations
// (see SelectiveFunction) touch simulated low-precision formats.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lamp/fp_sim.hpp"
#include "lamp/selection_mask.hpp"
#include "lamp/tensor.hpp"

namespace lamp::select {

enum class LampKind { unweighted, weighted };

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// K_u of softmax: I - 1 z^T with z a probability vector.
struct SoftmaxForm {
    std::vector<double> z;
};

/// K_w of RMS normalization: I - (1 y^T / ||y||^2) diag(y). `weights` caches y_i^2 / ||y||^2,
/// which makes it the same matrix as SoftmaxForm with z = weights.
struct RmsNormForm {
    std::vector<double> y;
    std::vector<double> weights;
};

/// LAMP matrix of a componentwise activation. Entries may be +inf where phi(y_i) vanishes.
struct DiagonalForm {
    std::vector<double> diagonal;
};

class LampMatrix {
public:
    using Representation = std::variant<DenseMatrix, SoftmaxForm, RmsNormForm, DiagonalForm>;

    LampMatrix(LampKind kind, Representation rep) : kind_(kind), rep_(std::move(rep)) {}

    LampKind kind() const noexcept { return kind_; }
    const Representation& representation() const noexcept { return rep_; }

    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;

    /// Explicit m x n realization (O(n^2) for the structured forms).
    DenseMatrix to_dense() const;

    /// ||K||_{inf,inf}, i.e. masked_norm with q = 0.
    double norm() const;

private:
    LampKind kind_;
    Representation rep_;
};

class LampThreshold {
public:
    /// Throws ContractViolation when tau is negative or NaN.
    explicit LampThreshold(double tau);
    double value() const noexcept { return tau_; }

private:
    double tau_;
};

/// A scalar function with its derivative, applied componentwise.
struct Activation {
    std::string name;
    std::function<double(double)> phi;
    std::function<double(double)> dphi;

    static Activation identity();
    static Activation exponential();
    /// GPT-2's tanh approximation of GELU.
    static Activation gelu_tanh();
};

/// || |K| (1 - q) ||_inf. Structured softmax / RMS-norm forms use the closed formulas for
/// |support| <= n - 2 and for support = [n] \ {j}; q = 1 gives 0.
double masked_norm(const LampMatrix& k, const SelectionMask& q);

/// Throws ContractViolation unless z_i >= 0 and |sum z - 1| <= 1e-6.
LampMatrix lamp_matrix_softmax(std::span<const double> z);
/// Throws SingularInput for a zero vector.
LampMatrix lamp_matrix_rmsnorm(std::span<const double> y);
LampMatrix lamp_matrix_activation(std::span<const double> y, const Activation& act, LampKind kind);

/// Generic route: K = diag(f)^-1 J [diag(y)] from a dense Jacobian and the values of f.
/// Rows with f_i = 0 become +inf.
LampMatrix lamp_matrix_from_jacobian(const DenseMatrix& jacobian, std::span<const double> f_values,
                                     std::span<const double> y, LampKind kind);

/// Analytic Jacobians at the given point (softmax takes its output z, RMS norm takes y).
DenseMatrix softmax_jacobian(std::span<const double> z);
DenseMatrix rmsnorm_jacobian(std::span<const double> y);

/// Work counters of the greedy solvers; used to pin down their O(n log n) structure.
struct GreedyCounters {
    std::size_t sorts = 0;
    std::size_t scan_steps = 0;
    std::size_t norm_checks = 0;
};

/// Almost-the-sparsest solution for softmax: feasible, and at most one element larger than
/// the optimum. Sort z descending (ties by index), then take the smallest prefix s <= n - 2
/// with sum_{i<=s} z_(i) + 2 z_(n) >= 2 - tau; otherwise fall back to leaving a single
/// component out, and finally to recomputing everything.
SelectionMask solve_lamp_greedy_softmax(std::span<const double> z, LampThreshold tau,
                                        GreedyCounters* counters = nullptr);

/// Same selection with z_i = y_i^2 / ||y||^2. Throws SingularInput for a zero vector.
SelectionMask solve_lamp_greedy_rmsnorm(std::span<const double> y, LampThreshold tau,
                                        GreedyCounters* counters = nullptr);

/// Exact optimum for a diagonal K: q_i = 1 iff |K_ii| > tau.
SelectionMask solve_lamp_activation(const LampMatrix& k, LampThreshold tau);

inline constexpr std::size_t kBruteForceMaxSize = 20;

/// Exhaustive search by increasing cardinality, lexicographic within a cardinality.
/// Throws SizeLimitExceeded for n > 20.
SelectionMask solve_lamp_bruteforce(const LampMatrix& k, LampThreshold tau);

/// Dispatches to the structured solver matching the representation of k, or brute force
/// for dense matrices.
SelectionMask solve_lamp(const LampMatrix& k, LampThreshold tau);

// ---------------------------------------------------------------------------------------
// Look-ahead evaluation of a composition f(g(x))

/// Inner function g with a low-precision pass over all components and a high-precision
/// recomputation of a single component.
struct SelectiveFunction {
    std::function<std::vector<float>()> baseline;
    std::function<float(std::size_t)> recompute;
};

/// g(x) = A x accumulated in `format`, recomputed with plain FP32 dots.
SelectiveFunction low_precision_matvec(const Tensor2D& a, std::span<const float> x,
                                       fp::FpFormat format);

enum class OuterKind { softmax, rmsnorm, activation };

struct OuterFunction {
    OuterKind kind = OuterKind::softmax;
    Activation activation = Activation::identity();  // used when kind == activation
};

struct LampEvaluation {
    std::vector<float> values;    // y after recomputation
    std::vector<float> baseline;  // y before recomputation
    SelectionMask mask;
};

/// Compute y, freeze K at y, solve the LAMP problem, recompute the selected components.
LampEvaluation lamp_evaluate(const SelectiveFunction& g, const OuterFunction& f, LampThreshold tau,
                             LampKind kind);

// ---------------------------------------------------------------------------------------
// Diagnostics

/// c_g = k |A||x| / |Ax| for a length-k inner product; +inf where Ax vanishes.
std::vector<double> condition_vector_matvec(const Tensor2D& a, std::span<const float> x);

/// First-order contribution of the inner error to the relative error of f(g(x)):
///     |J_f(y) diag(y)| (I - diag q) c_g / |f(y)| * u_g.
/// The outer-function term c_f u_f is not included. +inf in rows where f(y) vanishes.
std::vector<double> composition_error_bound(const DenseMatrix& jacobian,
                                            std::span<const double> f_values,
                                            std::span<const double> y_hat,
                                            std::span<const double> c_g, double u_g,
                                            const SelectionMask& q);

/// Same bound from a weighted LAMP matrix: |K_w| (I - diag q) c_g * u_g.
std::vector<double> composition_error_bound(const LampMatrix& k_weighted,
                                            std::span<const double> c_g, double u_g,
                                            const SelectionMask& q);

}  // namespace lamp::select
