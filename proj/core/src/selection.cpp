// Copyright 2026 The LAMP Authors
// SPDX-License-Identifier: Apache-2.0

#include "lamp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lamp/kernels.hpp"

namespace lamp::select {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbabilityTolerance = 1e-6;
constexpr double kVanishingActivation = 1e-30;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Row sums of |I - 1 w^T| restricted to columns outside the support, via the closed form.
// w is a probability vector: softmax output, or y_i^2 / ||y||^2 for RMS normalization.
double masked_norm_rank_one(std::span<const double> w, const SelectionMask& q) {
    const std::size_t n = w.size();
    const std::size_t selected = q.count();
    if (selected == n) return 0.0;

    if (selected + 1 == n) {
        std::size_t j = 0;
        while (q[j]) ++j;
        // Rows inside the support see only column j (value w_j); row j sees 1 - w_j.
        const double own = std::abs(1.0 - w[j]);
        return selected == 0 ? own : std::max(w[j], own);
    }

    double min_out = kInf;
    double sum_in = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (q[i]) {
            sum_in += w[i];
        } else {
            min_out = std::min(min_out, w[i]);
        }
    }
    return 2.0 * (1.0 - min_out) - sum_in;
}

double masked_norm_dense(const DenseMatrix& k, const SelectionMask& q) {
    double best = 0.0;
    for (std::size_t r = 0; r < k.rows; ++r) {
        double row = 0.0;
        for (std::size_t c = 0; c < k.cols; ++c) {
            if (!q[c]) row += std::abs(k(r, c));
        }
        best = std::max(best, row);
    }
    return best;
}

double masked_norm_diagonal(const DiagonalForm& d, const SelectionMask& q) {
    double best = 0.0;
    for (std::size_t i = 0; i < d.diagonal.size(); ++i) {
        if (!q[i]) best = std::max(best, std::abs(d.diagonal[i]));
    }
    return best;
}

DenseMatrix dense_rank_one(std::span<const double> w) {
    const std::size_t n = w.size();
    DenseMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) m(r, c) = (r == c ? 1.0 : 0.0) - w[c];
    }
    return m;
}

void validate_probability(std::span<const double> z, const char* who) {
    double total = 0.0;
    for (double v : z) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ContractViolation(std::string(who) + ": entries must be finite and nonnegative");
        }
        total += v;
    }
    if (z.empty() || std::abs(total - 1.0) > kProbabilityTolerance) {
        throw ContractViolation(std::string(who) + ": entries must sum to 1 (got " +
                                std::to_string(total) + ")");
    }
}

std::vector<double> squared_weights(std::span<const double> y, const char* who) {
    double sq = 0.0;
    for (double v : y) sq += v * v;
    if (!(sq > 0.0) || !std::isfinite(sq)) {
        throw SingularInput(std::string(who) + ": input vector has zero (or non-finite) norm");
    }
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) w[i] = y[i] * y[i] / sq;
    return w;
}

// Shared greedy over a probability vector w (softmax z, or normalized squares for RMS norm).
SelectionMask greedy_rank_one(std::span<const double> w, double tau, GreedyCounters* counters) {
    GreedyCounters local;
    GreedyCounters& ops = counters ? *counters : local;
    const std::size_t n = w.size();
    if (n <= 1) return SelectionMask::zeros(n);

    const double min_w = *std::min_element(w.begin(), w.end());
    if (2.0 * (1.0 - min_w) <= tau) return SelectionMask::zeros(n);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return w[a] > w[b] || (w[a] == w[b] && a < b);
    });
    ++ops.sorts;

    const double target = 2.0 - tau;
    const double tail = 2.0 * w[order[n - 1]];
    const SoftmaxForm form{std::vector<double>(w.begin(), w.end())};
    const LampMatrix k(LampKind::unweighted, form);

    SelectionMask q = SelectionMask::zeros(n);
    double prefix = 0.0;
    for (std::size_t s = 1; s + 2 <= n; ++s) {
        ++ops.scan_steps;
        q.set(order[s - 1]);
        prefix += w[order[s - 1]];
        if (prefix + tail >= target) {
            // Confirm with the evaluator the constraint is defined by; the prefix is summed in
            // sorted order and may differ from it in the last bit.
            ++ops.norm_checks;
            if (masked_norm(k, q) <= tau) return q;
        }
    }

    // Leave out the single component j minimizing max{w_j, 1 - w_j}; on ties keep the larger
    // components selected.
    std::size_t best_j = 0;
    double best_value = kInf;
    for (std::size_t j = 0; j < n; ++j) {
        const double v = std::max(w[j], 1.0 - w[j]);
        if (v < best_value || (v == best_value && w[j] < w[best_j])) {
            best_value = v;
            best_j = j;
        }
    }
    SelectionMask all_but_one = SelectionMask::ones(n);
    all_but_one.set(best_j, false);
    ++ops.norm_checks;
    if (masked_norm(k, all_but_one) <= tau) return all_but_one;

    return SelectionMask::ones(n);
}

void check_mask(const LampMatrix& k, const SelectionMask& q, const char* who) {
    if (q.size() != k.cols()) {
        throw ContractViolation(std::string(who) + ": mask length " + std::to_string(q.size()) +
                                " does not match LAMP matrix width " + std::to_string(k.cols()));
    }
}

std::vector<double> promote(std::span<const float> v) { return {v.begin(), v.end()}; }

}  // namespace

// ---------------------------------------------------------------------------------------

std::size_t LampMatrix::rows() const noexcept {
    return std::visit(Overloaded{[](const DenseMatrix& m) { return m.rows; },
                                 [](const SoftmaxForm& f) { return f.z.size(); },
                                 [](const RmsNormForm& f) { return f.y.size(); },
                                 [](const DiagonalForm& f) { return f.diagonal.size(); }},
                      rep_);
}

std::size_t LampMatrix::cols() const noexcept {
    return std::visit(Overloaded{[](const DenseMatrix& m) { return m.cols; },
                                 [](const SoftmaxForm& f) { return f.z.size(); },
                                 [](const RmsNormForm& f) { return f.y.size(); },
                                 [](const DiagonalForm& f) { return f.diagonal.size(); }},
                      rep_);
}

DenseMatrix LampMatrix::to_dense() const {
    return std::visit(
        Overloaded{[](const DenseMatrix& m) { return m; },
                   [](const SoftmaxForm& f) { return dense_rank_one(f.z); },
                   [](const RmsNormForm& f) {
                       // I - (1 y^T / ||y||^2) diag(y), evaluated directly from y.
                       const std::size_t n = f.y.size();
                       double sq = 0.0;
                       for (double v : f.y) sq += v * v;
                       DenseMatrix m(n, n);
                       for (std::size_t r = 0; r < n; ++r) {
                           for (std::size_t c = 0; c < n; ++c) {
                               m(r, c) = (r == c ? 1.0 : 0.0) - f.y[c] * f.y[c] / sq;
                           }
                       }
                       return m;
                   },
                   [](const DiagonalForm& f) {
                       const std::size_t n = f.diagonal.size();
                       DenseMatrix m(n, n);
                       for (std::size_t i = 0; i < n; ++i) m(i, i) = f.diagonal[i];
                       return m;
                   }},
        rep_);
}

double LampMatrix::norm() const { return masked_norm(*this, SelectionMask::zeros(cols())); }

LampThreshold::LampThreshold(double tau) : tau_(tau) {
    if (!(tau >= 0.0)) throw ContractViolation("LampThreshold: tau must be nonnegative");
}

Activation Activation::identity() {
    return {"identity", [](double y) { return y; }, [](double) { return 1.0; }};
}

Activation Activation::exponential() {
    return {"exp", [](double y) { return std::exp(y); }, [](double y) { return std::exp(y); }};
}

Activation Activation::gelu_tanh() {
    constexpr double kC = 0.7978845608028654;  // sqrt(2 / pi)
    constexpr double kA = 0.044715;
    return {"gelu",
            [](double y) { return 0.5 * y * (1.0 + std::tanh(kC * (y + kA * y * y * y))); },
            [](double y) {
                const double u = kC * (y + kA * y * y * y);
                const double t = std::tanh(u);
                const double du = kC * (1.0 + 3.0 * kA * y * y);
                return 0.5 * (1.0 + t) + 0.5 * y * (1.0 - t * t) * du;
            }};
}

double masked_norm(const LampMatrix& k, const SelectionMask& q) {
    check_mask(k, q, "masked_norm");
    return std::visit(Overloaded{[&](const DenseMatrix& m) { return masked_norm_dense(m, q); },
                                 [&](const SoftmaxForm& f) { return masked_norm_rank_one(f.z, q); },
                                 [&](const RmsNormForm& f) {
                                     return masked_norm_rank_one(f.weights, q);
                                 },
                                 [&](const DiagonalForm& f) { return masked_norm_diagonal(f, q); }},
                      k.representation());
}

LampMatrix lamp_matrix_softmax(std::span<const double> z) {
    validate_probability(z, "lamp_matrix_softmax");
    return {LampKind::unweighted, SoftmaxForm{{z.begin(), z.end()}}};
}

LampMatrix lamp_matrix_rmsnorm(std::span<const double> y) {
    auto w = squared_weights(y, "lamp_matrix_rmsnorm");
    return {LampKind::weighted, RmsNormForm{{y.begin(), y.end()}, std::move(w)}};
}

LampMatrix lamp_matrix_activation(std::span<const double> y, const Activation& act, LampKind kind) {
    std::vector<double> d(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double value = act.phi(y[i]);
        if (!(std::abs(value) >= kVanishingActivation)) {
            d[i] = kInf;
            continue;
        }
        const double ratio = act.dphi(y[i]) / value;
        d[i] = kind == LampKind::weighted ? ratio * y[i] : ratio;
    }
    return {kind, DiagonalForm{std::move(d)}};
}

LampMatrix lamp_matrix_from_jacobian(const DenseMatrix& jacobian, std::span<const double> f_values,
                                     std::span<const double> y, LampKind kind) {
    if (f_values.size() != jacobian.rows || y.size() != jacobian.cols) {
        throw ContractViolation("lamp_matrix_from_jacobian: shapes disagree");
    }
    DenseMatrix k(jacobian.rows, jacobian.cols);
    for (std::size_t r = 0; r < k.rows; ++r) {
        for (std::size_t c = 0; c < k.cols; ++c) {
            if (f_values[r] == 0.0) {
                k(r, c) = kInf;
                continue;
            }
            const double scale = kind == LampKind::weighted ? y[c] : 1.0;
            k(r, c) = jacobian(r, c) * scale / f_values[r];
        }
    }
    return {kind, std::move(k)};
}

DenseMatrix softmax_jacobian(std::span<const double> z) {
    const std::size_t n = z.size();
    DenseMatrix j(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) j(r, c) = (r == c ? z[r] : 0.0) - z[r] * z[c];
    }
    return j;
}

DenseMatrix rmsnorm_jacobian(std::span<const double> y) {
    const std::size_t n = y.size();
    double sq = 0.0;
    for (double v : y) sq += v * v;
    if (!(sq > 0.0)) throw SingularInput("rmsnorm_jacobian: input has zero norm");
    const double norm = std::sqrt(sq);
    const double root_n = std::sqrt(static_cast<double>(n));
    DenseMatrix j(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            j(r, c) = root_n * ((r == c ? 1.0 : 0.0) / norm - y[r] * y[c] / (sq * norm));
        }
    }
    return j;
}

SelectionMask solve_lamp_greedy_softmax(std::span<const double> z, LampThreshold tau,
                                        GreedyCounters* counters) {
    validate_probability(z, "solve_lamp_greedy_softmax");
    return greedy_rank_one(z, tau.value(), counters);
}

SelectionMask solve_lamp_greedy_rmsnorm(std::span<const double> y, LampThreshold tau,
                                        GreedyCounters* counters) {
    const auto w = squared_weights(y, "solve_lamp_greedy_rmsnorm");
    return greedy_rank_one(w, tau.value(), counters);
}

SelectionMask solve_lamp_activation(const LampMatrix& k, LampThreshold tau) {
    const auto* diag = std::get_if<DiagonalForm>(&k.representation());
    if (diag == nullptr) throw ContractViolation("solve_lamp_activation: LAMP matrix is not diagonal");
    SelectionMask q = SelectionMask::zeros(diag->diagonal.size());
    for (std::size_t i = 0; i < diag->diagonal.size(); ++i) {
        if (std::abs(diag->diagonal[i]) > tau.value()) q.set(i);
    }
    return q;
}

SelectionMask solve_lamp_bruteforce(const LampMatrix& k, LampThreshold tau) {
    const std::size_t n = k.cols();
    if (n > kBruteForceMaxSize) {
        throw SizeLimitExceeded("solve_lamp_bruteforce: n = " + std::to_string(n) +
                                " exceeds the limit of " + std::to_string(kBruteForceMaxSize));
    }
    std::vector<std::size_t> pick;
    for (std::size_t size = 0; size <= n; ++size) {
        pick.resize(size);
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        while (true) {
            SelectionMask q = SelectionMask::zeros(n);
            for (auto i : pick) q.set(i);
            if (masked_norm(k, q) <= tau.value()) return q;

            // Next size-element subset in lexicographic order.
            std::size_t pos = size;
            while (pos > 0 && pick[pos - 1] == n - size + pos - 1) --pos;
            if (pos == 0) break;
            ++pick[pos - 1];
            for (std::size_t i = pos; i < size; ++i) pick[i] = pick[i - 1] + 1;
        }
    }
    // q = 1 always attains 0 on finite matrices; reaching here means +inf entries remain.
    return SelectionMask::ones(n);
}

SelectionMask solve_lamp(const LampMatrix& k, LampThreshold tau) {
    return std::visit(
        Overloaded{[&](const DenseMatrix&) { return solve_lamp_bruteforce(k, tau); },
                   [&](const SoftmaxForm& f) { return greedy_rank_one(f.z, tau.value(), nullptr); },
                   [&](const RmsNormForm& f) {
                       return greedy_rank_one(f.weights, tau.value(), nullptr);
                   },
                   [&](const DiagonalForm&) { return solve_lamp_activation(k, tau); }},
        k.representation());
}

// ---------------------------------------------------------------------------------------

SelectiveFunction low_precision_matvec(const Tensor2D& a, std::span<const float> x,
                                       fp::FpFormat format) {
    if (a.cols != x.size()) throw ContractViolation("low_precision_matvec: shape mismatch");
    std::vector<float> input(x.begin(), x.end());
    return {
        [a, input, format] {
            std::vector<float> y(a.rows);
            const fp::MixedDotSpec spec{format};
            for (std::size_t i = 0; i < a.rows; ++i) y[i] = fp::mixed_dot(a.row(i), input, spec);
            return y;
        },
        [a, input](std::size_t i) { return fp::plain_dot(a.row(i), input); },
    };
}

LampEvaluation lamp_evaluate(const SelectiveFunction& g, const OuterFunction& f, LampThreshold tau,
                             LampKind kind) {
    LampEvaluation out;
    out.baseline = g.baseline();
    const std::vector<double> y = promote(out.baseline);
    const std::size_t n = y.size();

    // K is built once from the baseline and not refreshed after recomputation.
    const LampMatrix k = [&]() -> LampMatrix {
        switch (f.kind) {
            case OuterKind::softmax: {
                const auto z = promote(kernels::softmax_row(out.baseline, n));
                if (kind == LampKind::unweighted) return lamp_matrix_softmax(z);
                return lamp_matrix_from_jacobian(softmax_jacobian(z), z, y, kind);
            }
            case OuterKind::rmsnorm: {
                if (kind == LampKind::weighted) return lamp_matrix_rmsnorm(y);
                const auto fy = promote(kernels::rmsnorm(out.baseline));
                return lamp_matrix_from_jacobian(rmsnorm_jacobian(y), fy, y, kind);
            }
            case OuterKind::activation:
                return lamp_matrix_activation(y, f.activation, kind);
        }
        throw ContractViolation("lamp_evaluate: unknown outer function");
    }();

    const bool dense = std::holds_alternative<DenseMatrix>(k.representation());
    if (dense && n > kBruteForceMaxSize) {
        throw ContractViolation(
            "lamp_evaluate: no structured solver for this (function, objective) pair and n = " +
            std::to_string(n) + " is too large for exhaustive search");
    }
    out.mask = solve_lamp(k, tau);

    out.values = out.baseline;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.mask[i]) out.values[i] = g.recompute(i);
    }
    return out;
}

// ---------------------------------------------------------------------------------------

std::vector<double> condition_vector_matvec(const Tensor2D& a, std::span<const float> x) {
    if (a.cols != x.size()) throw ContractViolation("condition_vector_matvec: shape mismatch");
    const double k = static_cast<double>(a.cols);
    std::vector<double> c(a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double abs_sum = 0.0;
        double sum = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double term = static_cast<double>(a(i, j)) * x[j];
            abs_sum += std::abs(term);
            sum += term;
        }
        c[i] = sum == 0.0 ? kInf : k * abs_sum / std::abs(sum);
    }
    return c;
}

std::vector<double> composition_error_bound(const DenseMatrix& jacobian,
                                            std::span<const double> f_values,
                                            std::span<const double> y_hat,
                                            std::span<const double> c_g, double u_g,
                                            const SelectionMask& q) {
    if (f_values.size() != jacobian.rows || y_hat.size() != jacobian.cols ||
        c_g.size() != jacobian.cols || q.size() != jacobian.cols) {
        throw ContractViolation("composition_error_bound: shapes disagree");
    }
    std::vector<double> bound(jacobian.rows, 0.0);
    for (std::size_t r = 0; r < jacobian.rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < jacobian.cols; ++c) {
            if (!q[c]) acc += std::abs(jacobian(r, c) * y_hat[c]) * c_g[c];
        }
        bound[r] = f_values[r] == 0.0 ? kInf : acc / std::abs(f_values[r]) * u_g;
    }
    return bound;
}

std::vector<double> composition_error_bound(const LampMatrix& k_weighted,
                                            std::span<const double> c_g, double u_g,
                                            const SelectionMask& q) {
    if (k_weighted.kind() != LampKind::weighted) {
        throw ContractViolation("composition_error_bound: expects a weighted LAMP matrix");
    }
    check_mask(k_weighted, q, "composition_error_bound");
    if (c_g.size() != k_weighted.cols()) {
        throw ContractViolation("composition_error_bound: c_g length mismatch");
    }
    const DenseMatrix k = k_weighted.to_dense();
    std::vector<double> bound(k.rows, 0.0);
    for (std::size_t r = 0; r < k.rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < k.cols; ++c) {
            if (!q[c]) acc += std::abs(k(r, c)) * c_g[c];
        }
        bound[r] = acc * u_g;
    }
    return bound;
}

}  // namespace lamp::select
