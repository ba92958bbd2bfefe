#include "modpulse/qfa.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace modpulse {

namespace {

constexpr double kMatrixTol = 1e-12;

void check_modp_spec(const ModpSpec& spec) {
    if (!is_prime(spec.p)) {
        throw std::invalid_argument("MOD^p requires a prime p, got p=" + std::to_string(spec.p));
    }
    if (spec.k < 1 || spec.k > spec.p - 1) {
        throw std::invalid_argument("rotation multiplier k must lie in 1..p-1, got k=" +
                                    std::to_string(spec.k) + " for p=" + std::to_string(spec.p));
    }
}

}  // namespace

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; static_cast<long long>(d) * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

Mo1Qfa::Mo1Qfa(std::map<char, Eigen::MatrixXcd> transitions,
               Eigen::VectorXcd initial_state,
               Eigen::MatrixXcd accepting_projector)
    : transitions_(std::move(transitions)),
      initial_state_(std::move(initial_state)),
      accepting_projector_(std::move(accepting_projector)) {
    const Eigen::Index dim = initial_state_.size();
    if (dim < 1) throw std::invalid_argument("automaton dimension must be at least 1");
    if (transitions_.empty()) throw std::invalid_argument("alphabet must be non-empty");

    const Eigen::MatrixXcd identity = Eigen::MatrixXcd::Identity(dim, dim);
    for (const auto& [symbol, u] : transitions_) {
        if (u.rows() != dim || u.cols() != dim) {
            throw std::invalid_argument(std::string("transition for '") + symbol +
                                        "' has wrong shape");
        }
        if (((u * u.adjoint()) - identity).cwiseAbs().maxCoeff() > kMatrixTol) {
            throw std::invalid_argument(std::string("transition for '") + symbol +
                                        "' is not unitary");
        }
    }
    if (std::abs(initial_state_.norm() - 1.0) > kMatrixTol) {
        throw std::invalid_argument("initial state is not normalized");
    }
    const Eigen::MatrixXcd& p = accepting_projector_;
    if (p.rows() != dim || p.cols() != dim) {
        throw std::invalid_argument("accepting projector has wrong shape");
    }
    if ((p - p.adjoint()).cwiseAbs().maxCoeff() > kMatrixTol ||
        (p * p - p).cwiseAbs().maxCoeff() > kMatrixTol) {
        throw std::invalid_argument("accepting projector is not a Hermitian idempotent");
    }
}

std::vector<char> Mo1Qfa::alphabet() const {
    std::vector<char> symbols;
    symbols.reserve(transitions_.size());
    for (const auto& [symbol, u] : transitions_) symbols.push_back(symbol);
    return symbols;
}

const Eigen::MatrixXcd& Mo1Qfa::transition(char symbol) const {
    auto it = transitions_.find(symbol);
    if (it == transitions_.end()) {
        throw std::invalid_argument(std::string("symbol '") + symbol + "' not in alphabet");
    }
    return it->second;
}

Mo1Qfa make_modp_qfa(const ModpSpec& spec) {
    check_modp_spec(spec);
    const double angle = spec.k * 2.0 * std::numbers::pi / spec.p;
    const std::complex<double> c(std::cos(angle), 0.0);
    const std::complex<double> ms(0.0, -std::sin(angle));

    Eigen::MatrixXcd u(2, 2);
    u << c, ms,
         ms, c;

    Eigen::VectorXcd q0(2);
    q0 << 1.0, 0.0;

    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
    acc(0, 0) = 1.0;

    return Mo1Qfa({{'a', u}}, q0, acc);
}

Eigen::VectorXcd run_word(const Mo1Qfa& qfa, std::string_view word) {
    Eigen::VectorXcd state = qfa.initial_state();
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (!qfa.has_symbol(word[i])) {
            throw std::invalid_argument(std::string("unknown symbol '") + word[i] +
                                        "' at position " + std::to_string(i));
        }
        state = qfa.transition(word[i]) * state;
    }
    return state;
}

double acceptance_probability(const Mo1Qfa& qfa, std::string_view word) {
    return (qfa.accepting_projector() * run_word(qfa, word)).squaredNorm();
}

double modp_expected_probability(const ModpSpec& spec, std::int64_t length) {
    const std::int64_t reduced = length % spec.p;
    const double c = std::cos(spec.k * 2.0 * std::numbers::pi * static_cast<double>(reduced) /
                              spec.p);
    return c * c;
}

double worst_case_false_positive(int p) {
    if (p < 2) throw std::invalid_argument("p must be at least 2");
    const double c = std::cos(std::numbers::pi / p);
    return c * c;
}

double ensemble_acceptance(int p, const std::vector<int>& k_set, std::int64_t length) {
    if (k_set.empty()) throw std::invalid_argument("ensemble requires a non-empty k set");
    double prod = 1.0;
    for (int k : k_set) {
        check_modp_spec({p, k});
        prod *= modp_expected_probability({p, k}, length);
    }
    return prod;
}

bool classical_membership(int p, std::int64_t length) {
    ClassicalModpDfa dfa{p};
    for (std::int64_t i = 0; i < length; ++i) dfa.step();
    return dfa.accepting();
}

}  // namespace modpulse
