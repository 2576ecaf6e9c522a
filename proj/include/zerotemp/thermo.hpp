#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "language.hpp"
#include "words.hpp"

namespace zerotemp {

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// Sparse nonnegative matrix stored as log-weights; repeated (row, col) entries add up.
struct LogMatrix {
    struct Entry {
        std::size_t col;
        double logw;
    };
    std::size_t n = 0;
    std::vector<std::vector<Entry>> rows;

    explicit LogMatrix(std::size_t size = 0) : n(size), rows(size) {}

    void add(std::size_t i, std::size_t j, double logw) { rows[i].push_back({j, logw}); }

    static LogMatrix from_dense(const std::vector<std::vector<double>>& a) {
        LogMatrix m(a.size());
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a[i].size(); ++j)
                if (a[i][j] > 0) m.add(i, j, std::log(a[i][j]));
        return m;
    }
};

// De Bruijn transfer matrix of a potential table: state u (length m-1), successor u[1:]s,
// weight exp(beta*phi(us) - shift). The shift is beta*max(phi), so every weight lies in (0, 1].
struct TransferMatrix {
    int m = 1;
    int alphabet = 2;
    double beta = 0;
    double shift = 0;
    std::size_t states = 1;
    std::vector<std::size_t> next;  // states*alphabet successor indices
    std::vector<double> logw;       // states*alphabet log-weights (shift removed)
    std::vector<double> phi;        // states*alphabet potential values

    LogMatrix log_matrix() const {
        LogMatrix out(states);
        for (std::size_t u = 0; u < states; ++u)
            for (int s = 0; s < alphabet; ++s) {
                const auto e = u * static_cast<std::size_t>(alphabet) + static_cast<std::size_t>(s);
                out.add(u, next[e], logw[e]);
            }
        return out;
    }
};

inline TransferMatrix transfer_matrix(const PotentialTable& pot, double beta) {
    if (!(beta >= 0)) fail(ErrorKind::InvalidInput, "beta must be nonnegative");
    TransferMatrix t;
    t.m = pot.m;
    t.alphabet = pot.alphabet;
    t.beta = beta;
    const auto a = static_cast<std::size_t>(pot.alphabet);
    t.states = pot.size() / a;
    t.next.resize(pot.size());
    t.logw.resize(pot.size());
    t.phi.resize(pot.size());
    double top = -std::numeric_limits<double>::infinity();
    for (double v : pot.values) top = std::max(top, v);
    t.shift = beta == 0 ? 0.0 : beta * top;
    for (std::size_t u = 0; u < t.states; ++u)
        for (std::size_t s = 0; s < a; ++s) {
            const std::size_t code = u * a + s;  // the window u·s
            const auto e = code;
            t.next[e] = code % t.states;
            t.phi[e] = pot.values[code];
            t.logw[e] = beta == 0 ? 0.0 : beta * pot.values[code] - t.shift;
        }
    return t;
}

struct EigenOptions {
    double tol = 1e-12;
    std::size_t max_iterations = 1'000'000;
};

struct EigenResult {
    double log_lambda = 0;
    std::vector<double> log_left;   // normalized so the maximum entry is 0
    std::vector<double> log_right;
    std::size_t iterations = 0;
};

namespace detail {

// Normalized power iteration in the log domain on K + tau*I, with tau tracking the current
// eigenvalue estimate to suppress periodicity. Stops when the Collatz-Wielandt bounds of
// successive iterates agree to tol.
inline std::pair<double, std::vector<double>> log_power(const LogMatrix& m, bool transpose, const EigenOptions& opt,
                                                        std::size_t& iterations) {
    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<double> x(m.n, 0.0), y(m.n);
    double log_tau = ninf;
    for (std::size_t i = 0; i < m.n; ++i) {
        double r = ninf;
        for (const auto& e : m.rows[i]) r = log_add(r, e.logw);
        log_tau = std::max(log_tau, r);
    }
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        std::fill(y.begin(), y.end(), ninf);
        if (!transpose) {
            for (std::size_t i = 0; i < m.n; ++i)
                for (const auto& e : m.rows[i]) y[i] = log_add(y[i], e.logw + x[e.col]);
        } else {
            for (std::size_t i = 0; i < m.n; ++i)
                for (const auto& e : m.rows[i]) y[e.col] = log_add(y[e.col], e.logw + x[i]);
        }
        double lo = std::numeric_limits<double>::infinity(), hi = ninf;
        for (std::size_t i = 0; i < m.n; ++i) {
            const double yi = log_add(y[i], log_tau + x[i]);
            const double ratio = yi - x[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
            y[i] = yi;
        }
        // Eigenvalue of K from that of K + tau*I.
        auto unshift = [&](double r) { return r + std::log1p(-std::exp(log_tau - r)); };
        const double est = unshift(0.5 * (lo + hi));
        const double top = *std::max_element(y.begin(), y.end());
        for (std::size_t i = 0; i < m.n; ++i) x[i] = y[i] - top;
        iterations = it;
        if (hi - lo < opt.tol && std::abs(est - prev) < opt.tol) return {est, x};
        prev = est;
        if (std::isfinite(est)) log_tau = est;
    }
    fail(ErrorKind::NumericFailure, "power iteration did not converge within " + std::to_string(opt.max_iterations) +
                                        " iterations (last estimate " + std::to_string(prev) + ")");
}

}  // namespace detail

inline EigenResult leading_eigen(const LogMatrix& m, const EigenOptions& opt = {}) {
    if (m.n == 0) fail(ErrorKind::InvalidInput, "empty matrix");
    EigenResult r;
    std::size_t it_right = 0, it_left = 0;
    auto right = detail::log_power(m, false, opt, it_right);
    auto left = detail::log_power(m, true, opt, it_left);
    r.log_lambda = right.first;
    r.log_right = std::move(right.second);
    r.log_left = std::move(left.second);
    r.iterations = std::max(it_right, it_left);
    return r;
}

// Stationary Markov measure on de Bruijn states: state u = x_i..x_{i+m-2}, step appends x_{i+m-1}.
struct MarkovMeasure {
    int m = 1;
    int alphabet = 2;
    std::size_t states = 1;
    std::vector<std::size_t> next;  // states*alphabet
    std::vector<double> prob;       // q(u -> next) per (u, s)
    std::vector<double> pi;
};

struct TransferSolution {
    double beta = 0;
    int m = 1;
    double pressure = 0;
    std::vector<double> log_left;
    std::vector<double> log_right;
    MarkovMeasure markov;
    std::size_t iterations = 0;
};

inline MarkovMeasure gibbs_measure(const TransferMatrix& t, const EigenResult& eig) {
    MarkovMeasure mm;
    mm.m = t.m;
    mm.alphabet = t.alphabet;
    mm.states = t.states;
    mm.next = t.next;
    mm.prob.resize(t.next.size());
    mm.pi.resize(t.states);
    const auto a = static_cast<std::size_t>(t.alphabet);
    for (std::size_t u = 0; u < t.states; ++u) {
        double total = 0;
        for (std::size_t s = 0; s < a; ++s) {
            const auto e = u * a + s;
            mm.prob[e] = std::exp(t.logw[e] + eig.log_right[t.next[e]] - eig.log_right[u] - eig.log_lambda);
            total += mm.prob[e];
        }
        for (std::size_t s = 0; s < a; ++s) mm.prob[u * a + s] /= total;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t u = 0; u < t.states; ++u) top = std::max(top, eig.log_left[u] + eig.log_right[u]);
    double z = 0;
    for (std::size_t u = 0; u < t.states; ++u) z += mm.pi[u] = std::exp(eig.log_left[u] + eig.log_right[u] - top);
    for (auto& p : mm.pi) p /= z;
    return mm;
}

inline TransferSolution solve_transfer(const PotentialTable& pot, double beta, const EigenOptions& opt = {}) {
    const auto t = transfer_matrix(pot, beta);
    const auto eig = leading_eigen(t.log_matrix(), opt);
    TransferSolution sol;
    sol.beta = beta;
    sol.m = pot.m;
    sol.pressure = eig.log_lambda + t.shift;
    sol.log_left = eig.log_left;
    sol.log_right = eig.log_right;
    sol.markov = gibbs_measure(t, eig);
    sol.iterations = eig.iterations;
    return sol;
}

inline MarkovMeasure gibbs_measure(const TransferSolution& sol) { return sol.markov; }

inline double entropy(const MarkovMeasure& mm) {
    double h = 0;
    const auto a = static_cast<std::size_t>(mm.alphabet);
    for (std::size_t u = 0; u < mm.states; ++u)
        for (std::size_t s = 0; s < a; ++s) {
            const double q = mm.prob[u * a + s];
            if (q > 0) h -= mm.pi[u] * q * std::log(q);
        }
    return h;
}

inline double cylinder_mass(const MarkovMeasure& mm, const Word& w) {
    if (w.empty()) fail(ErrorKind::InvalidInput, "cylinder of the empty word");
    if (w.alphabet() != mm.alphabet) fail(ErrorKind::InvalidInput, "alphabet mismatch in cylinder_mass");
    const auto a = static_cast<std::size_t>(mm.alphabet);
    const std::size_t k = static_cast<std::size_t>(mm.m - 1);  // state length
    // States whose first min(|w|, k) symbols agree with w.
    const std::size_t fixed = std::min(w.size(), k);
    std::size_t prefix = 0;
    for (std::size_t i = 0; i < fixed; ++i) prefix = prefix * a + static_cast<std::size_t>(w[i]);
    std::size_t span = 1;
    for (std::size_t i = fixed; i < k; ++i) span *= a;
    double total = 0;
    for (std::size_t j = 0; j < span; ++j) {
        std::size_t u = prefix * span + j;
        double p = mm.pi[u];
        for (std::size_t i = k; i < w.size() && p > 0; ++i) {
            const auto e = u * a + static_cast<std::size_t>(w[i]);
            p *= mm.prob[e];
            u = mm.next[e];
        }
        total += p;
    }
    return total;
}

template <class Measure, class Family>
double mass_on_family(const Measure& mm, const Family& family) {
    double total = 0;
    std::size_t len = 0;
    for (const auto& w : family) {
        if (len == 0) len = w.size();
        if (w.size() != len) fail(ErrorKind::InvalidInput, "family words must share one length");
        total += cylinder_mass(mm, w);
    }
    return total;
}

// Mean of the potential under the Markov measure, from length-m cylinder masses.
inline double mean_potential(const MarkovMeasure& mm, const PotentialTable& pot) {
    double total = 0;
    const auto a = static_cast<std::size_t>(mm.alphabet);
    for (std::size_t u = 0; u < mm.states; ++u)
        for (std::size_t s = 0; s < a; ++s) total += mm.pi[u] * mm.prob[u * a + s] * pot.values[u * a + s];
    return total;
}

// pressure - (beta * integral of phi + entropy).
inline double variational_residual(const TransferSolution& sol, const PotentialTable& pot) {
    return sol.pressure - (sol.beta * mean_potential(sol.markov, pot) + entropy(sol.markov));
}

// (1/n) log of the sum over all cyclic words of length n of exp(beta * sum of window potentials).
inline double periodic_pressure_oracle(const PotentialTable& pot, double beta, int n,
                                       std::uint64_t budget = 200'000'000ULL) {
    if (n < pot.m) fail(ErrorKind::InvalidInput, "periodic oracle needs n >= m");
    const auto a = static_cast<std::size_t>(pot.alphabet);
    std::uint64_t words = 1;
    for (int i = 0; i < n; ++i) {
        words *= a;
        if (words * static_cast<std::uint64_t>(n) > budget)
            fail(ErrorKind::ResourceLimit, "periodic oracle with n = " + std::to_string(n) + " exceeds the budget");
    }
    const auto m = static_cast<std::size_t>(pot.m);
    std::size_t window = 1;
    for (std::size_t i = 0; i < m; ++i) window *= a;
    std::vector<double> terms;
    terms.reserve(words);
    std::vector<std::size_t> sym(static_cast<std::size_t>(n));
    double top = -std::numeric_limits<double>::infinity();
    for (std::uint64_t code = 0; code < words; ++code) {
        auto c = code;
        for (std::size_t i = static_cast<std::size_t>(n); i-- > 0;) {
            sym[i] = static_cast<std::size_t>(c % a);
            c /= a;
        }
        double sum = 0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
            std::size_t wc = 0;
            for (std::size_t j = 0; j < m; ++j) wc = wc * a + sym[(i + j) % static_cast<std::size_t>(n)];
            sum += pot.values[wc];
        }
        const double t = beta * sum;
        terms.push_back(t);
        top = std::max(top, t);
    }
    double z = 0;
    for (double t : terms) z += std::exp(t - top);
    return (top + std::log(z)) / n;
}

}  // namespace zerotemp
