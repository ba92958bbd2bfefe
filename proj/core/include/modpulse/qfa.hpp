// Measure-once one-way quantum finite automata and the MOD^p instance:
// unitary per-symbol transitions, one left-to-right pass over the word,
// a single projective measurement at the end.
#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace modpulse {

// MOD^p = { a^(jp) } for prime p; k is the rotation multiplier in 1..p-1
// (member automaton k of a parallel ensemble uses angle k*2*pi/p).
struct ModpSpec {
    int p = 11;
    int k = 1;
};

bool is_prime(int n);

// General automaton over a finite char alphabet. The alphabet is the key
// set of the transition map. Construction validates unitarity of every
// transition, normalization of the initial state and idempotence of the
// accepting projector (all to 1e-12).
class Mo1Qfa {
public:
    Mo1Qfa(std::map<char, Eigen::MatrixXcd> transitions,
           Eigen::VectorXcd initial_state,
           Eigen::MatrixXcd accepting_projector);

    Eigen::Index dimension() const { return initial_state_.size(); }
    std::vector<char> alphabet() const;
    bool has_symbol(char symbol) const { return transitions_.count(symbol) != 0; }
    const Eigen::MatrixXcd& transition(char symbol) const;
    const Eigen::VectorXcd& initial_state() const { return initial_state_; }
    const Eigen::MatrixXcd& accepting_projector() const { return accepting_projector_; }

private:
    std::map<char, Eigen::MatrixXcd> transitions_;
    Eigen::VectorXcd initial_state_;
    Eigen::MatrixXcd accepting_projector_;
};

// The p-state cycle automaton used as the exact language oracle in tests.
struct ClassicalModpDfa {
    int p;
    int residue = 0;

    void step() { residue = (residue + 1) % p; }
    bool accepting() const { return residue == 0; }
};

// Two-state automaton for MOD^p: single symbol 'a', x-rotation by k*4*pi/p
// per symbol, initial state |0>, accepting projector |0><0|.
// Rejects non-prime p.
Mo1Qfa make_modp_qfa(const ModpSpec& spec);

// Applies the transition unitaries left-to-right over the word.
// Throws on a symbol outside the alphabet, naming the offending position.
Eigen::VectorXcd run_word(const Mo1Qfa& qfa, std::string_view word);

// || P_acc U_W |q0> ||^2
double acceptance_probability(const Mo1Qfa& qfa, std::string_view word);

// Closed form cos^2(k*2*pi*length/p). Argument is reduced mod p before the
// trig call so arbitrarily long words stay exact.
double modp_expected_probability(const ModpSpec& spec, std::int64_t length);

// cos^2(pi/p): the asymptotic false-positive ceiling near lengths
// congruent to p/2 mod p. Requires p >= 2.
double worst_case_false_positive(int p);

// Probability that every member of a parallel ensemble accepts:
// product of cos^2(k*2*pi*length/p) over k_set (all-accept rule).
double ensemble_acceptance(int p, const std::vector<int>& k_set, std::int64_t length);

// Runs the classical cycle DFA; true iff length mod p == 0.
bool classical_membership(int p, std::int64_t length);

}  // namespace modpulse
