#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qrep/cw_chain.hpp"
#include "qrep/dual.hpp"
#include "qrep/pulsed_chain.hpp"
#include "qrep/source_model.hpp"

// Brute-force validator on a truncated multimode Fock space. A chain state lives
// on 2m modes: modes [0, m) belong to the first memory, [m, 2m) to the second.
// Matrices are dense and real (every state in this model has real amplitudes).
namespace qrep::fock {

using Occupation = std::vector<std::uint8_t>;

class Basis {
public:
    Basis(int modes, int max_photons);

    int modes() const { return modes_; }
    int max_photons() const { return max_photons_; }
    std::size_t size() const { return states_.size(); }
    const Occupation& state(std::size_t i) const { return states_[i]; }
    int photons(std::size_t i) const { return photons_[i]; }
    // -1 when the occupation is outside the truncation.
    long index(const Occupation& occ) const;

private:
    int modes_;
    int max_photons_;
    std::vector<Occupation> states_;
    std::vector<int> photons_;
    std::map<Occupation, long> lookup_;
};

// Basis of a two-memory chain with m modes per memory and its factorization
// into single-memory states.
class ChainBasis {
public:
    ChainBasis(int m, int max_photons);

    int m() const { return m_; }
    const Basis& chain() const { return chain_; }
    const Basis& memory() const { return memory_; }
    std::size_t size() const { return chain_.size(); }
    long first(std::size_t k) const { return first_[k]; }
    long second(std::size_t k) const { return second_[k]; }
    // chain index of (a in first memory, b in second memory), -1 if truncated
    long join(long a, long b) const { return join_[a * memory_.size() + b]; }
    long vacuum_memory() const { return 0; }
    long single_memory(int mode) const { return single_[mode]; }

private:
    int m_;
    Basis chain_;
    Basis memory_;
    std::vector<long> first_, second_, join_, single_;
};

template <class T>
struct Density {
    const ChainBasis* basis = nullptr;
    std::vector<T> data;

    explicit Density(const ChainBasis& b) : basis(&b), data(b.size() * b.size(), T(0.0)) {}
    std::size_t dim() const { return basis->size(); }
    T& operator()(std::size_t i, std::size_t j) { return data[i * dim() + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * dim() + j]; }
    T trace() const;
};

enum class LossTarget { First, Second, Both };

template <class T>
Density<T> apply_loss(const Density<T>& rho, LossTarget target, double eta);

// Single-click swap of two chains (first memory of a kept, second memory of b kept),
// "+" detector, unnormalized; output truncated to the chain basis.
template <class T>
Density<T> swap(const Density<T>& a, const Density<T>& b, double eta);

template <class T>
struct ReadoutResult {
    T F{};
    T p_ps{};
    T p10{}, p01{}, p11{}, p00{};
};

// Final readout of two parallel chains with efficiency eta and post-selection on
// exactly one photon per end.
template <class T>
ReadoutResult<T> readout(const Density<T>& upper, const Density<T>& lower, double eta);

template <class T>
Diagonal<T> diagonal_sums(const Density<T>& rho);

// Pulsed ----------------------------------------------------------------------

template <class T>
struct PulsedOracleResult {
    PulsedCoefficients<T> coeffs;  // extracted from the normalized oracle state
    T F{};
    T p_ps{};
    std::vector<T> swap_probs;     // success probability of each swap
    double residual = 0.0;         // max |rho - ansatz(extracted)|
};

// Depth-0 heralded chain state from the two-pair source expansion, normalized.
template <class T>
Density<T> pulsed_initial_state(const ChainBasis& basis, const ModeDecomposition& modes, const T& P1);

// Density matrix of the pulsed ansatz for the given coefficients.
template <class T>
Density<T> pulsed_ansatz(const ChainBasis& basis, const PulsedCoefficients<T>& k, const ModeDecomposition& modes);

template <class T>
PulsedCoefficients<T> extract_pulsed(const Density<T>& rho, const ModeDecomposition& modes, int depth,
                                     double* residual = nullptr);

template <class T>
PulsedOracleResult<T> simulate_pulsed(const ModeDecomposition& modes, const T& P1, double eta2, int n);

// CW --------------------------------------------------------------------------

struct CwBins {
    std::vector<double> t;  // node times in [-T/2, T/2]
    std::vector<double> w;  // quadrature weights
};

// Quadrature bins: Gauss-Legendre nodes on [-T/2, 0] and [0, T/2], m/2 each.
CwBins make_cw_bins(double kappa_T, int m);

template <class T>
struct CwOracleResult {
    Diagonal<T> diag;
    T A_sum{};   // A0 + A1 + A2: twice the trace of the A-B coherence block
    T B0{};      // twice the reduced trace of the (1,1)-(0,2) coherence block
    T F{};
    T p_ps{};
    std::vector<T> swap_probs;
};

// Effective coefficients of a CW chain state.
template <class T>
void cw_effective_coefficients(const Density<T>& rho, CwOracleResult<T>& out);

// Depth-0 heralded chain state built from the two-time correlation functions by
// Wick factorization; T = Dual carries x^2 as the expansion variable.
template <class T>
Density<T> cw_initial_state(const ChainBasis& basis, const CwBins& bins, const T& x2);

template <class T>
CwOracleResult<T> simulate_cw_effective(double kappa_T, const T& x2, double eta2, int n, int bins = 12);

}  // namespace qrep::fock
