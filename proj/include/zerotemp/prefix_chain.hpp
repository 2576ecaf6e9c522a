#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "error.hpp"
#include "language.hpp"
#include "thermo.hpp"
#include "words.hpp"

namespace zerotemp {

// Exact lumping of the memory-m de Bruijn transfer operator for the distance potential.
// The state attached to a position i is the longest admissible prefix of x_i x_{i+1} ..,
// cut at length m-1. Prepending x_{i-1} determines the next state and the window potential,
// so the chain runs backwards in time; its Perron root, entropy and cylinder masses coincide
// with those of the de Bruijn chain. States are then merged up to bisimulation.
class PrefixChain {
public:
    PrefixChain(const AdmissibilityOracle& oracle, int m, std::size_t max_states = 2'000'000) : m_(m) {
        if (m < 1) fail(ErrorKind::InvalidInput, "memory must be positive");
        if (static_cast<std::size_t>(m) > oracle.max_length())
            fail(ErrorKind::DepthExceeded, "oracle range is shorter than the memory");
        const auto cap = static_cast<std::int32_t>(m - 1);
        std::unordered_map<std::uint64_t, std::uint32_t> index;
        std::deque<std::uint32_t> queue;
        auto key = [&](std::int32_t v, std::int32_t len) {
            return static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(m) + static_cast<std::uint64_t>(len);
        };
        auto intern = [&](std::int32_t v, std::int32_t len) {
            const auto kk = key(v, len);
            auto it = index.find(kk);
            if (it != index.end()) return it->second;
            if (node_.size() >= max_states)
                fail(ErrorKind::ResourceLimit, "prefix chain exceeds " + std::to_string(max_states) + " states");
            const auto id = static_cast<std::uint32_t>(node_.size());
            node_.push_back(v);
            len_.push_back(len);
            index.emplace(kk, id);
            queue.push_back(id);
            return id;
        };
        if (cap == 0) {
            intern(0, 0);
        } else {
            std::int32_t v = 0, len = 0;
            oracle.prepend(v, len, 0);
            intern(v, len);
        }
        while (!queue.empty()) {
            const auto id = queue.front();
            queue.pop_front();
            for (int s = 0; s < 2; ++s) {
                std::int32_t v = node_[id], len = len_[id];
                oracle.prepend(v, len, s);
                const auto n = static_cast<std::uint32_t>(len);
                if (len > cap) {
                    len = cap;
                    oracle.truncate(v, len);
                }
                const auto to = intern(v, len);
                if (next_.size() < 2 * (static_cast<std::size_t>(id) + 1)) next_.resize(2 * (static_cast<std::size_t>(id) + 1));
                if (n_.size() < next_.size()) n_.resize(next_.size());
                next_[2 * id + static_cast<std::size_t>(s)] = to;
                n_[2 * id + static_cast<std::size_t>(s)] = n;
            }
        }
        expanded_ = node_.size();
        reduce();
    }

    int memory() const noexcept { return m_; }
    // Number of (reduced) states.
    std::size_t size() const noexcept { return next_.size() / 2; }
    // Number of admissible-prefix states before the reduction.
    std::size_t expanded_size() const noexcept { return expanded_; }
    std::uint32_t next(std::size_t state, int s) const { return next_[2 * state + static_cast<std::size_t>(s)]; }
    // Longest admissible prefix length (capped at m) of the window opened by prepending s.
    std::uint32_t window(std::size_t state, int s) const { return n_[2 * state + static_cast<std::size_t>(s)]; }

private:
    // Coarsest partition compatible with the edge potentials and the symbol-labelled successors
    // (Moore refinement). Every quantity computed here is constant on its classes.
    void reduce() {
        const std::size_t n = node_.size();
        const auto m = static_cast<std::uint32_t>(m_);
        std::vector<std::uint32_t> cls(n), fresh(n);
        for (std::size_t i = 0; i < n; ++i)
            cls[i] = std::min(n_[2 * i], m) * (m + 1) + std::min(n_[2 * i + 1], m);
        std::size_t count = 0;
        while (true) {
            std::unordered_map<std::string, std::uint32_t> ids;
            ids.reserve(2 * n);
            char key[12];
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint32_t sig[3] = {cls[i], cls[next_[2 * i]], cls[next_[2 * i + 1]]};
                std::memcpy(key, sig, sizeof key);
                fresh[i] = ids.emplace(std::string(key, sizeof key), static_cast<std::uint32_t>(ids.size())).first->second;
            }
            std::swap(cls, fresh);
            if (ids.size() == count) break;
            count = ids.size();
        }
        std::vector<std::uint32_t> next(2 * count), win(2 * count);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t s = 0; s < 2; ++s) {
                next[2 * cls[i] + s] = cls[next_[2 * i + s]];
                win[2 * cls[i] + s] = n_[2 * i + s];
            }
        next_ = std::move(next);
        n_ = std::move(win);
        node_.clear();
        node_.shrink_to_fit();
        len_.clear();
        len_.shrink_to_fit();
    }

    int m_;
    std::size_t expanded_ = 0;
    std::vector<std::int32_t> node_;
    std::vector<std::int32_t> len_;
    std::vector<std::uint32_t> next_;
    std::vector<std::uint32_t> n_;
};

struct ChainSolverOptions {
    double tol = 1e-12;
    int max_factorizations = 40;
    int solves_per_factorization = 30;
};

// Stationary measure of the backward chain: state p at position i moves to state f(s, p) at
// position i-1 with probability q, where s = x_{i-1}.
struct ChainMeasure {
    const PrefixChain* chain = nullptr;
    std::vector<double> pi;
    std::vector<double> prob;  // 2 per state
    double pressure = 0;
    double entropy = 0;
    double mean_potential = 0;
    double beta = 0;
    Envelope envelope = Envelope::Upper;
    int factorizations = 0;
    double log_lambda = 0;     // pressure minus the weight shift
    double shifted_energy = 0; // mean of beta*phi - shift, free of cancellation at huge beta

    double variational_residual() const { return log_lambda - (shifted_energy + entropy); }
};

namespace detail {

inline std::vector<double> chain_weights(const PrefixChain& chain, double beta, Envelope env, double& shift,
                                         std::vector<double>& phi) {
    const std::size_t m = static_cast<std::size_t>(chain.memory());
    const std::size_t e = 2 * chain.size();
    phi.resize(e);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e; ++i) {
        phi[i] = window_potential(chain.window(i / 2, static_cast<int>(i % 2)), m, env);
        top = std::max(top, phi[i]);
    }
    shift = beta == 0 ? 0.0 : beta * top;
    std::vector<double> w(e);
    for (std::size_t i = 0; i < e; ++i) w[i] = beta == 0 ? 1.0 : std::exp(beta * phi[i] - shift);
    return w;
}

}  // namespace detail

// Perron data by shifted inverse iteration (sparse LU of sigma*I - K, sigma just above the
// current eigenvalue estimate), reusing the last factorization for the left vector.
inline ChainMeasure solve_chain(const PrefixChain& chain, double beta, Envelope env,
                                const ChainSolverOptions& opt = {}) {
    if (!(beta >= 0)) fail(ErrorKind::InvalidInput, "beta must be nonnegative");
    using SpMat = Eigen::SparseMatrix<double>;
    using Vec = Eigen::VectorXd;
    const std::size_t n = chain.size();
    double shift = 0;
    std::vector<double> phi;
    const auto w = detail::chain_weights(chain, beta, env, shift, phi);

    auto apply = [&](const Vec& x, Vec& y) {
        for (std::size_t i = 0; i < n; ++i)
            y[static_cast<Eigen::Index>(i)] = w[2 * i] * x[chain.next(i, 0)] + w[2 * i + 1] * x[chain.next(i, 1)];
    };
    auto apply_t = [&](const Vec& x, Vec& y) {
        y.setZero();
        for (std::size_t i = 0; i < n; ++i)
            for (int s = 0; s < 2; ++s) y[chain.next(i, s)] += w[2 * i + static_cast<std::size_t>(s)] * x[static_cast<Eigen::Index>(i)];
    };
    auto estimate = [&](const Vec& x, const Vec& kx) {
        return kx.cwiseAbs().sum() / x.cwiseAbs().sum();
    };
    auto normalize = [](Vec& x) {
        const double s = x.sum();
        x /= (s < 0 ? -1.0 : 1.0) * x.cwiseAbs().maxCoeff();
    };

    // Collatz-Wielandt upper bound max (Kx)_i / x_i over positive entries; it stays above the
    // Perron root, so sigma never drops below it and the iterate stays positive.
    auto upper_bound = [&](const Vec& x, const Vec& kx) {
        double hi = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (x[i] > 0) hi = std::max(hi, kx[i] / x[i]);
        return hi;
    };

    const auto N = static_cast<Eigen::Index>(n);
    Vec r = Vec::Ones(N), kr(N);
    apply(r, kr);
    double lambda = kr.maxCoeff();
    double sigma = lambda * (1 + 1e-6) + 1e-300;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * n);
    bool converged = false;
    int fact = 0;
    double residual = 0;
    for (; fact < opt.max_factorizations && !converged; ++fact) {
        trip.clear();
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<int>(i);
            trip.emplace_back(ii, ii, sigma);
            for (int s = 0; s < 2; ++s) {
                const double x = w[2 * i + static_cast<std::size_t>(s)];
                if (x > 0) trip.emplace_back(ii, static_cast<int>(chain.next(i, s)), -x);
            }
        }
        SpMat a(N, N);
        a.setFromTriplets(trip.begin(), trip.end());
        a.makeCompressed();
        if (fact == 0) lu.analyzePattern(a);
        lu.factorize(a);
        if (lu.info() != Eigen::Success) {
            sigma = sigma * (1 + 1e-8) + 1e-300;
            continue;
        }
        double hi = sigma;
        for (int k = 0; k < opt.solves_per_factorization; ++k) {
            Vec y = lu.solve(r);
            if (!y.allFinite()) break;
            normalize(y);
            r = y;
            apply(r, kr);
            lambda = estimate(r, kr);
            const double before = hi;
            hi = std::min(hi, upper_bound(r, kr));
            residual = (kr - lambda * r).cwiseAbs().maxCoeff() / (lambda * r.cwiseAbs().maxCoeff());
            if (residual < opt.tol) {
                converged = true;
                break;
            }
            // Refactorize once the bound stalls relative to the current shift distance.
            if (k > 0 && before - hi < 0.01 * (sigma - hi)) break;
        }
        if (!converged) sigma = hi * (1 + 1e-11) + 1e-300;
    }
    if (!converged)
        fail(ErrorKind::NumericFailure, "inverse iteration did not converge at beta = " + std::to_string(beta) +
                                            " (residual " + std::to_string(residual) + ")");

    // Left vector with the same factorization: (sigma I - K)^T is factorized as well.
    Vec l = Vec::Ones(N), kl(N);
    double lres = 0;
    bool lconv = false;
    for (int k = 0; k < 200 && !lconv; ++k) {
        Vec y = lu.transpose().solve(l);
        normalize(y);
        l = y;
        apply_t(l, kl);
        lres = (kl - lambda * l).cwiseAbs().maxCoeff() / (lambda * l.cwiseAbs().maxCoeff());
        lconv = lres < 1e3 * opt.tol;
    }
    if (!lconv)
        fail(ErrorKind::NumericFailure, "left eigenvector did not converge at beta = " + std::to_string(beta));
    for (Eigen::Index i = 0; i < N; ++i) {
        r[i] = std::max(r[i], 0.0);
        l[i] = std::max(l[i], 0.0);
    }

    ChainMeasure mm;
    mm.chain = &chain;
    mm.beta = beta;
    mm.envelope = env;
    mm.factorizations = fact;
    mm.log_lambda = std::log(lambda);
    mm.pressure = mm.log_lambda + shift;
    mm.pi.resize(n);
    mm.prob.assign(2 * n, 0.0);
    double z = 0;
    for (std::size_t i = 0; i < n; ++i) z += mm.pi[i] = l[static_cast<Eigen::Index>(i)] * r[static_cast<Eigen::Index>(i)];
    for (auto& p : mm.pi) p /= z;
    for (std::size_t i = 0; i < n; ++i) {
        const double ri = r[static_cast<Eigen::Index>(i)];
        if (ri <= 0) continue;
        double total = 0;
        for (int s = 0; s < 2; ++s) {
            const auto e = 2 * i + static_cast<std::size_t>(s);
            total += mm.prob[e] = w[e] * r[chain.next(i, s)] / (lambda * ri);
        }
        if (!(total > 0)) {
            mm.prob[2 * i] = mm.prob[2 * i + 1] = 0.0;
            continue;
        }
        for (int s = 0; s < 2; ++s) mm.prob[2 * i + static_cast<std::size_t>(s)] /= total;
    }
    for (std::size_t i = 0; i < n; ++i)
        for (int s = 0; s < 2; ++s) {
            const auto e = 2 * i + static_cast<std::size_t>(s);
            const double q = mm.prob[e];
            if (q <= 0) continue;
            mm.entropy -= mm.pi[i] * q * std::log(q);
            mm.mean_potential += mm.pi[i] * q * phi[e];
            mm.shifted_energy += mm.pi[i] * q * (beta == 0 ? 0.0 : beta * phi[e] - shift);
        }
    return mm;
}

inline double entropy(const ChainMeasure& mm) { return mm.entropy; }

// Mass of [w]: start from the stationary law at position |w| and prepend w backwards.
inline double cylinder_mass(const ChainMeasure& mm, const Word& w) {
    if (w.empty()) fail(ErrorKind::InvalidInput, "cylinder of the empty word");
    if (w.alphabet() != 2) fail(ErrorKind::InvalidInput, "alphabet mismatch in cylinder_mass");
    const auto& chain = *mm.chain;
    std::vector<std::pair<std::uint32_t, double>> cur, nxt;
    cur.reserve(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i)
        if (mm.pi[i] > 0) cur.emplace_back(static_cast<std::uint32_t>(i), mm.pi[i]);
    std::unordered_map<std::uint32_t, std::size_t> slot;
    for (std::size_t j = w.size(); j-- > 0;) {
        const int s = w[j];
        nxt.clear();
        slot.clear();
        for (const auto& [p, mass] : cur) {
            const double q = mm.prob[2 * p + static_cast<std::size_t>(s)];
            if (q <= 0) continue;
            const auto to = chain.next(p, s);
            auto [it, fresh] = slot.emplace(to, nxt.size());
            if (fresh)
                nxt.emplace_back(to, mass * q);
            else
                nxt[it->second].second += mass * q;
        }
        std::swap(cur, nxt);
        if (cur.empty()) return 0.0;
    }
    double total = 0;
    for (const auto& [p, mass] : cur) total += mass;
    return total;
}

// Mass of the one-symbol cylinder [s].
inline double symbol_mass(const ChainMeasure& mm, int s) {
    double total = 0;
    for (std::size_t i = 0; i < mm.pi.size(); ++i) total += mm.pi[i] * mm.prob[2 * i + static_cast<std::size_t>(s)];
    return total;
}

}  // namespace zerotemp
