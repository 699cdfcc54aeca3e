#include "qrep/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qrep/quadrature.hpp"

namespace qrep::fock {

// Bases --------------------------------------------------------------------------

Basis::Basis(int modes, int max_photons) : modes_(modes), max_photons_(max_photons) {
    require(modes >= 1 && max_photons >= 0, ErrorKind::InvalidInput, "basis: need modes >= 1");
    Occupation occ(modes, 0);
    std::function<void(int, int)> rec = [&](int q, int left) {
        if (q == modes) {
            states_.push_back(occ);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            occ[q] = static_cast<std::uint8_t>(k);
            rec(q + 1, left - k);
        }
        occ[q] = 0;
    };
    rec(0, max_photons);
    auto count = [](const Occupation& o) {
        int s = 0;
        for (auto v : o) s += v;
        return s;
    };
    std::stable_sort(states_.begin(), states_.end(), [&](const Occupation& a, const Occupation& b) {
        int na = count(a), nb = count(b);
        if (na != nb) return na < nb;
        return a > b;
    });
    for (std::size_t i = 0; i < states_.size(); ++i) {
        photons_.push_back(count(states_[i]));
        lookup_[states_[i]] = static_cast<long>(i);
    }
}

long Basis::index(const Occupation& occ) const {
    auto it = lookup_.find(occ);
    return it == lookup_.end() ? -1 : it->second;
}

ChainBasis::ChainBasis(int m, int max_photons) : m_(m), chain_(2 * m, max_photons), memory_(m, max_photons) {
    const std::size_t mu = memory_.size();
    first_.resize(chain_.size());
    second_.resize(chain_.size());
    for (std::size_t k = 0; k < chain_.size(); ++k) {
        const Occupation& o = chain_.state(k);
        first_[k] = memory_.index(Occupation(o.begin(), o.begin() + m));
        second_[k] = memory_.index(Occupation(o.begin() + m, o.end()));
    }
    join_.assign(mu * mu, -1);
    for (std::size_t a = 0; a < mu; ++a) {
        for (std::size_t b = 0; b < mu; ++b) {
            if (memory_.photons(a) + memory_.photons(b) > max_photons) continue;
            Occupation o = memory_.state(a);
            o.insert(o.end(), memory_.state(b).begin(), memory_.state(b).end());
            join_[a * mu + b] = chain_.index(o);
        }
    }
    for (int q = 0; q < m; ++q) {
        Occupation o(m, 0);
        o[q] = 1;
        single_.push_back(memory_.index(o));
    }
}

template <class T>
T Density<T>::trace() const {
    T s(0.0);
    for (std::size_t i = 0; i < dim(); ++i) s += (*this)(i, i);
    return s;
}

template <class T>
Diagonal<T> diagonal_sums(const Density<T>& rho) {
    const ChainBasis& B = *rho.basis;
    Diagonal<T> d;
    for (std::size_t k = 0; k < B.size(); ++k) {
        int na = B.memory().photons(B.first(k)), nb = B.memory().photons(B.second(k));
        const T& v = rho(k, k);
        if (na + nb == 0) d.c00 += v;
        else if (na + nb == 1) d.c10 += v;
        else if (na == 1 && nb == 1) d.c11 += v;
        else if (na + nb == 2) d.c20 += v;
    }
    return d;
}

// Loss ----------------------------------------------------------------------------

namespace {

struct LossBranch {
    long key;   // lost photons, one base-128 digit per photon in mode order
    long out;   // output basis index
    double amp;
};

std::vector<std::vector<LossBranch>> loss_branches(const ChainBasis& B, LossTarget target, double eta) {
    const Basis& C = B.chain();
    const int m = B.m();
    std::vector<std::vector<LossBranch>> br(C.size());
    for (std::size_t i = 0; i < C.size(); ++i) {
        const Occupation& o = C.state(i);
        // enumerate the number lost in every affected mode
        std::vector<LossBranch> acc{{0, 0, 1.0}};
        std::vector<Occupation> outs{o};
        std::vector<LossBranch> next;
        std::vector<Occupation> next_outs;
        for (int q = 0; q < 2 * m; ++q) {
            bool hit = target == LossTarget::Both || (target == LossTarget::First && q < m) ||
                       (target == LossTarget::Second && q >= m);
            int n = o[q];
            if (!hit || n == 0) continue;
            next.clear();
            next_outs.clear();
            for (std::size_t b = 0; b < acc.size(); ++b) {
                for (int l = 0; l <= n; ++l) {
                    double binom = (n == 2 && l == 1) ? 2.0 : 1.0;
                    double a = std::sqrt(binom * std::pow(eta, n - l) * std::pow(1.0 - eta, l));
                    if (a == 0.0) continue;
                    LossBranch nb = acc[b];
                    nb.amp *= a;
                    for (int r = 0; r < l; ++r) nb.key = nb.key * 128 + (q + 1);
                    Occupation no = outs[b];
                    no[q] = static_cast<std::uint8_t>(n - l);
                    next.push_back(nb);
                    next_outs.push_back(no);
                }
            }
            acc.swap(next);
            outs.swap(next_outs);
        }
        for (std::size_t b = 0; b < acc.size(); ++b) {
            acc[b].out = C.index(outs[b]);
            br[i].push_back(acc[b]);
        }
        std::sort(br[i].begin(), br[i].end(), [](const LossBranch& x, const LossBranch& y) { return x.key < y.key; });
    }
    return br;
}

bool is_zero(double v) { return v == 0.0; }
bool is_zero(const Dual& v) { return v.v == 0.0 && v.d == 0.0; }

double magnitude(double v) { return std::abs(v); }
double magnitude(const Dual& v) { return std::max(std::abs(v.v), std::abs(v.d)); }

}  // namespace

template <class T>
Density<T> apply_loss(const Density<T>& rho, LossTarget target, double eta) {
    require(eta >= 0.0 && eta <= 1.0, ErrorKind::Domain, "apply_loss: eta outside [0,1]");
    const ChainBasis& B = *rho.basis;
    auto br = loss_branches(B, target, eta);
    Density<T> out(B);
    const std::size_t D = B.size();
    for (std::size_t i = 0; i < D; ++i) {
        for (std::size_t j = 0; j < D; ++j) {
            const T& v = rho(i, j);
            if (is_zero(v)) continue;
            // identical loss patterns on ket and bra
            const auto& bi = br[i];
            const auto& bj = br[j];
            std::size_t p = 0, q = 0;
            while (p < bi.size() && q < bj.size()) {
                if (bi[p].key < bj[q].key) ++p;
                else if (bi[p].key > bj[q].key) ++q;
                else {
                    long key = bi[p].key;
                    std::size_t q0 = q;
                    for (; p < bi.size() && bi[p].key == key; ++p)
                        for (q = q0; q < bj.size() && bj[q].key == key; ++q)
                            out(bi[p].out, bj[q].out) += v * (bi[p].amp * bj[q].amp);
                }
            }
        }
    }
    return out;
}

// Swap -----------------------------------------------------------------------------

template <class T>
Density<T> swap(const Density<T>& a, const Density<T>& b, double eta) {
    require(a.basis == b.basis, ErrorKind::InvalidInput, "swap: chains must share a basis");
    const ChainBasis& B = *a.basis;
    const std::size_t mu = B.memory().size();
    const int m = B.m();
    Density<T> la = apply_loss(a, LossTarget::Second, eta);
    Density<T> lb = apply_loss(b, LossTarget::First, eta);
    const long vac = B.vacuum_memory();
    auto entry = [&](const Density<T>& r, long i, long j) -> T {
        if (i < 0 || j < 0) return T(0.0);
        return r(i, j);
    };
    // X_pq(al, al') = la[(al, p), (al', q)], Y_pq(de, de') = lb[(p, de), (q, de')], p, q in {vac, 1_j}
    auto block = [&](const Density<T>& r, bool kept_first, long p, long q) {
        std::vector<T> M(mu * mu, T(0.0));
        for (std::size_t x = 0; x < mu; ++x)
            for (std::size_t y = 0; y < mu; ++y) {
                long i = kept_first ? B.join(x, p) : B.join(p, x);
                long j = kept_first ? B.join(y, q) : B.join(q, y);
                M[x * mu + y] = entry(r, i, j);
            }
        return M;
    };
    std::vector<T> X00 = block(la, true, vac, vac), Y00 = block(lb, false, vac, vac);
    Density<T> out(B);
    const std::size_t D = B.size();
    for (int j = 0; j < m; ++j) {
        long s = B.single_memory(j);
        std::vector<T> Xjj = block(la, true, s, s), Xj0 = block(la, true, s, vac), X0j = block(la, true, vac, s);
        std::vector<T> Yjj = block(lb, false, s, s), Yj0 = block(lb, false, s, vac), Y0j = block(lb, false, vac, s);
        for (std::size_t k = 0; k < D; ++k) {
            std::size_t al = B.first(k), de = B.second(k);
            for (std::size_t kp = 0; kp < D; ++kp) {
                std::size_t alp = B.first(kp), dep = B.second(kp);
                std::size_t x = al * mu + alp, y = de * mu + dep;
                out(k, kp) += 0.5 * (Xjj[x] * Y00[y] + Xj0[x] * Y0j[y] + X0j[x] * Yj0[y] + X00[x] * Yjj[y]);
            }
        }
    }
    return out;
}

// Readout ---------------------------------------------------------------------------

template <class T>
ReadoutResult<T> readout(const Density<T>& upper, const Density<T>& lower, double eta) {
    require(upper.basis == lower.basis, ErrorKind::InvalidInput, "readout: chains must share a basis");
    const ChainBasis& B = *upper.basis;
    Density<T> u = apply_loss(upper, LossTarget::Both, eta);
    Density<T> l = apply_loss(lower, LossTarget::Both, eta);
    struct Probs { T p00{}, p10{}, p01{}, p11{}; };
    auto probs = [&](const Density<T>& r) {
        Probs p;
        for (std::size_t k = 0; k < B.size(); ++k) {
            int na = B.memory().photons(B.first(k)), nb = B.memory().photons(B.second(k));
            if (na == 0 && nb == 0) p.p00 += r(k, k);
            if (na == 1 && nb == 0) p.p10 += r(k, k);
            if (na == 0 && nb == 1) p.p01 += r(k, k);
            if (na == 1 && nb == 1) p.p11 += r(k, k);
        }
        return p;
    };
    Probs pu = probs(u), pl = probs(l);
    const long vac = B.vacuum_memory();
    T coh(0.0);
    for (int j = 0; j < B.m(); ++j) {
        for (int k = 0; k < B.m(); ++k) {
            long sj = B.single_memory(j), sk = B.single_memory(k);
            long a = B.join(sj, vac), b = B.join(vac, sk);
            coh += u(a, b) * l(b, a) + u(b, a) * l(a, b);
        }
    }
    ReadoutResult<T> r;
    r.p_ps = pu.p10 * pl.p01 + pu.p01 * pl.p10 + pu.p11 * pl.p00 + pu.p00 * pl.p11;
    require(value_of(r.p_ps) > 0.0, ErrorKind::UndefinedFidelity, "readout: post-selection probability is zero");
    r.F = (pu.p10 * pl.p01 + pu.p01 * pl.p10 + coh) / (2.0 * r.p_ps);
    r.p10 = pu.p10;
    r.p01 = pu.p01;
    r.p11 = pu.p11;
    r.p00 = pu.p00;
    return r;
}

// Pulsed ----------------------------------------------------------------------------

namespace {

// Sparse ket on 4M modes: signals A [0, M), signals B [M, 2M), idlers A [2M, 3M), idlers B [3M, 4M).
template <class T>
using Ket = std::map<Occupation, T>;

template <class T>
void add_to(Ket<T>& k, const Occupation& o, const T& a) {
    auto it = k.find(o);
    if (it == k.end()) k.emplace(o, a);
    else it->second += a;
}

template <class T>
Ket<T> create(const Ket<T>& k, int q) {
    Ket<T> out;
    for (const auto& [o, a] : k) {
        Occupation n = o;
        n[q] += 1;
        add_to(out, n, a * std::sqrt(static_cast<double>(n[q])));
    }
    return out;
}

template <class T>
Ket<T> annihilate(const Ket<T>& k, int q) {
    Ket<T> out;
    for (const auto& [o, a] : k) {
        if (o[q] == 0) continue;
        Occupation n = o;
        double f = std::sqrt(static_cast<double>(n[q]));
        n[q] -= 1;
        add_to(out, n, a * f);
    }
    return out;
}

template <class T>
void axpy(Ket<T>& y, const Ket<T>& x, double a) {
    for (const auto& [o, v] : x) add_to(y, o, v * a);
}

// Heralded signal density on the chain basis: sum over idler modes l of
// Tr_idler[b_l |psi><psi| b_l^dag] with b_l = (i_Al + i_Bl)/sqrt 2.
template <class T>
Density<T> herald(const ChainBasis& B, const Ket<T>& psi, int M) {
    Density<T> rho(B);
    for (int l = 0; l < M; ++l) {
        Ket<T> phi = annihilate(psi, 2 * M + l);
        Ket<T> phiB = annihilate(psi, 3 * M + l);
        Ket<T> sum;
        axpy(sum, phi, 1.0 / std::sqrt(2.0));
        axpy(sum, phiB, 1.0 / std::sqrt(2.0));
        // group by idler occupation
        std::map<Occupation, std::vector<std::pair<long, T>>> groups;
        for (const auto& [o, a] : sum) {
            Occupation sig(o.begin(), o.begin() + 2 * M), idl(o.begin() + 2 * M, o.end());
            long idx = B.chain().index(sig);
            require(idx >= 0, ErrorKind::DimensionOverflow, "pulsed oracle: signal state outside truncation");
            groups[idl].push_back({idx, a});
        }
        for (const auto& [idl, v] : groups)
            for (const auto& [i, ai] : v)
                for (const auto& [j, aj] : v) rho(i, j) += ai * aj;
    }
    return rho;
}

template <class T>
Ket<T> pair_creation(const Ket<T>& k, const std::vector<double>& w, int src, int M) {
    Ket<T> out;
    for (int l = 0; l < M; ++l) {
        Ket<T> t = create(create(k, src * M + l), (2 + src) * M + l);
        axpy(out, t, std::sqrt(w[l]));
    }
    return out;
}

}  // namespace

template <class T>
Density<T> pulsed_initial_state(const ChainBasis& B, const ModeDecomposition& modes, const T& P1) {
    const int M = static_cast<int>(modes.weights.size());
    require(B.m() == M, ErrorKind::InvalidInput, "pulsed_initial_state: basis does not match mode count");
    Ket<T> vac;
    vac.emplace(Occupation(4 * M, 0), T(1.0));
    Ket<T> kA = pair_creation(vac, modes.weights, 0, M);
    Ket<T> kB = pair_creation(vac, modes.weights, 1, M);
    Ket<T> one;
    axpy(one, kA, 1.0);
    axpy(one, kB, 1.0);
    Ket<T> two;
    axpy(two, pair_creation(kA, modes.weights, 1, M), 1.0);
    axpy(two, pair_creation(kA, modes.weights, 0, M), 0.5);
    axpy(two, pair_creation(kB, modes.weights, 1, M), 0.5);
    Density<T> r1 = herald(B, one, M);
    Density<T> r2 = herald(B, two, M);
    Density<T> rho(B);
    for (std::size_t i = 0; i < rho.data.size(); ++i) rho.data[i] = (1.0 - P1) * r1.data[i] + P1 * r2.data[i];
    T tr = rho.trace();
    for (auto& v : rho.data) v = v / tr;
    return rho;
}

namespace {

// Occupation of one photon in mode a and one in mode b (a may equal b) on a memory.
long memory_pair(const ChainBasis& B, int a, int b) {
    Occupation o(B.m(), 0);
    o[a] += 1;
    o[b] += 1;
    return B.memory().index(o);
}

template <class T>
void ansatz_offdiag(Density<T>& rho, long k1, long k2, const T& v) {
    rho(k1, k2) += v;
    rho(k2, k1) += v;
}

}  // namespace

template <class T>
Density<T> pulsed_ansatz(const ChainBasis& B, const PulsedCoefficients<T>& k, const ModeDecomposition& modes) {
    const auto& w = modes.weights;
    const int M = static_cast<int>(w.size());
    const double pur = modes.purity;
    const double power = std::ldexp(1.0, k.depth_n);
    const double lam_scale = std::sqrt(2.0 / (1.0 + pur));
    const long vac = B.vacuum_memory();
    Density<T> rho(B);
    rho(B.join(vac, vac), B.join(vac, vac)) += k.diag.c00;
    for (int l = 0; l < M; ++l) {
        long s = B.single_memory(l);
        rho(B.join(s, vac), B.join(s, vac)) += k.diag.c10 / 2.0 * w[l];
        rho(B.join(vac, s), B.join(vac, s)) += k.diag.c10 / 2.0 * w[l];
        for (int q = 0; q < M; ++q) {
            long sq = B.single_memory(q);
            rho(B.join(s, sq), B.join(s, sq)) += k.diag.c11 * w[l] * w[q];
        }
        for (int q = l; q < M; ++q) {
            long p = memory_pair(B, l, q);
            T v = k.diag.c20 / (1.0 + pur) * w[l] * w[q];
            rho(B.join(p, vac), B.join(p, vac)) += v;
            rho(B.join(vac, p), B.join(vac, p)) += v;
        }
        double wp = std::pow(w[l], power);
        double lam = lam_scale * (1.0 + w[l]);
        ansatz_offdiag(rho, B.join(s, vac), B.join(vac, s), (k.A0 + k.A1 * lam) / 2.0 * wp);
        T b = k.B0 / 2.0 * wp * lam_scale;
        for (int q = 0; q < M; ++q) {
            long sq = B.single_memory(q);
            long pair = memory_pair(B, l, q);
            double f = (q == l) ? std::sqrt(2.0) * w[l] : w[q];
            // |1_l><0| x |1_q><1_q 1_l|  and  |1_q 1_l><1_q| x |0><1_l|
            ansatz_offdiag(rho, B.join(s, sq), B.join(vac, pair), b * f);
            ansatz_offdiag(rho, B.join(pair, vac), B.join(sq, s), b * f);
        }
    }
    return rho;
}

template <class T>
PulsedCoefficients<T> extract_pulsed(const Density<T>& rho, const ModeDecomposition& modes, int depth,
                                     double* residual) {
    const ChainBasis& B = *rho.basis;
    const auto& w = modes.weights;
    const int M = static_cast<int>(w.size());
    const double pur = modes.purity;
    const double power = std::ldexp(1.0, depth);
    const double lam_scale = std::sqrt(2.0 / (1.0 + pur));
    const long vac = B.vacuum_memory();
    PulsedCoefficients<T> k;
    k.depth_n = depth;
    k.diag = diagonal_sums(rho);
    k.normalized = true;

    // A0, A1: rho[(1_l, 0), (0, 1_l)] = (A0 + A1 Lambda_l) w_l^{2^n} / 2
    std::vector<double> r0, r1;
    std::vector<T> y;
    for (int l = 0; l < M; ++l) {
        long s = B.single_memory(l);
        double wp = std::pow(w[l], power);
        r0.push_back(wp / 2.0);
        r1.push_back(wp / 2.0 * lam_scale * (1.0 + w[l]));
        y.push_back(rho(B.join(s, vac), B.join(vac, s)));
    }
    double g00 = 0, g01 = 0, g11 = 0;
    T b0(0.0), b1(0.0);
    for (int l = 0; l < M; ++l) {
        g00 += r0[l] * r0[l];
        g01 += r0[l] * r1[l];
        g11 += r1[l] * r1[l];
        b0 += y[l] * r0[l];
        b1 += y[l] * r1[l];
    }
    double det = g00 * g11 - g01 * g01;
    if (M >= 2 && std::abs(det) > 1e-12 * g00 * g11) {
        k.A0 = (b0 * g11 - b1 * g01) / det;
        k.A1 = (b1 * g00 - b0 * g01) / det;
    } else {
        // one mode: A0 and A1 are not separable
        k.A0 = b0 / g00;
        k.A1 = T(0.0);
    }

    // B0 from all its placements
    double gb = 0;
    T yb(0.0);
    for (int l = 0; l < M; ++l) {
        long s = B.single_memory(l);
        double base = std::pow(w[l], power) / 2.0 * lam_scale;
        for (int q = 0; q < M; ++q) {
            long sq = B.single_memory(q);
            long pair = memory_pair(B, l, q);
            double f = base * ((q == l) ? std::sqrt(2.0) * w[l] : w[q]);
            yb += rho(B.join(s, sq), B.join(vac, pair)) * f;
            yb += rho(B.join(pair, vac), B.join(sq, s)) * f;
            gb += 2.0 * f * f;
        }
    }
    k.B0 = yb / gb;

    if (residual) {
        Density<T> a = pulsed_ansatz(B, k, modes);
        double r = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) r = std::max(r, magnitude(rho.data[i] - a.data[i]));
        *residual = r;
    }
    return k;
}

template <class T>
PulsedOracleResult<T> simulate_pulsed(const ModeDecomposition& modes, const T& P1, double eta2, int n) {
    const int M = static_cast<int>(modes.weights.size());
    if (M > 3 || n > 2) fail(ErrorKind::DimensionOverflow, "simulate_pulsed: needs M <= 3 and n <= 2");
    require(n >= 0, ErrorKind::Domain, "simulate_pulsed: n must be >= 0");
    require(eta2 > 0.0 && eta2 <= 1.0, ErrorKind::Domain, "simulate_pulsed: eta2 must lie in (0, 1]");
    ChainBasis B(M, 2);
    Density<T> rho = pulsed_initial_state(B, modes, P1);
    PulsedOracleResult<T> res;
    for (int j = 0; j < n; ++j) {
        Density<T> next = swap(rho, rho, eta2);
        T tr = next.trace();
        res.swap_probs.push_back(2.0 * tr);
        for (auto& v : next.data) v = v / tr;
        rho = std::move(next);
    }
    res.coeffs = extract_pulsed(rho, modes, n, &res.residual);
    ReadoutResult<T> r = readout(rho, rho, eta2);
    res.F = r.F;
    res.p_ps = r.p_ps;
    return res;
}

// CW --------------------------------------------------------------------------------

CwBins make_cw_bins(double kappa_T, int m) {
    require(kappa_T > 0.0, ErrorKind::Domain, "make_cw_bins: kappa T must be > 0");
    require(m >= 2 && m % 2 == 0 && m <= 24, ErrorKind::DimensionOverflow, "make_cw_bins: need an even bin count <= 24");
    Rule r = composite_gl({-kappa_T / 2.0, 0.0, kappa_T / 2.0}, m / 2);
    return CwBins{r.x, r.w};
}

template <class T>
Density<T> cw_initial_state(const ChainBasis& B, const CwBins& bins, const T& x2) {
    const int m = B.m();
    require(static_cast<int>(bins.t.size()) == m, ErrorKind::InvalidInput, "cw_initial_state: bins do not match basis");
    const int Q = 2 * m;  // mode q: source q / m, bin q % m
    std::vector<T> mt(Q);
    for (int q = 0; q < Q; ++q) {
        double t = bins.t[q % m], a = std::abs(t);
        double g = 1.0 + a / 2.0;
        mt[q] = std::sqrt(bins.w[q % m]) * (1.0 / std::sqrt(2.0)) * std::exp(-a / 2.0) * (1.0 + x2 / 2.0 * g * g);
    }
    auto Nb = [&](int p, int q) -> T {
        if (p / m != q / m) return T(0.0);
        double d = std::abs(bins.t[p % m] - bins.t[q % m]);
        return x2 / 2.0 * std::sqrt(bins.w[p % m] * bins.w[q % m]) * std::exp(-d / 2.0) * (1.0 + d / 2.0);
    };
    auto G2 = [&](int x, int y) { return mt[x] * mt[y] / 2.0 + Nb(x, y); };
    auto G4 = [&](int x1, int x2m, int y1, int y2) {
        int xs[2] = {x1, x2m}, ys[2] = {y1, y2};
        T s(0.0);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s += mt[ys[i]] * mt[xs[j]] / 2.0 * Nb(xs[1 - j], ys[1 - i]);
        return s;
    };
    const Basis& C = B.chain();
    Density<T> rho(B);
    // modes of each basis state
    std::vector<std::array<int, 2>> occ(C.size(), {-1, -1});
    for (std::size_t k = 0; k < C.size(); ++k) {
        int c = 0;
        for (int q = 0; q < Q; ++q)
            for (int r = 0; r < C.state(k)[q]; ++r) occ[k][c++] = q;
    }
    T tr(0.0);
    for (std::size_t k = 0; k < C.size(); ++k) {
        for (std::size_t kp = 0; kp < C.size(); ++kp) {
            int n = C.photons(k);
            if (n != C.photons(kp) || n == 0) continue;
            if (n == 1) {
                int x = occ[k][0], y = occ[kp][0];
                T v = G2(x, y);
                for (int e = 0; e < Q; ++e) v -= G4(x, e, y, e);
                rho(k, kp) = v;
            } else {
                double sk = occ[k][0] == occ[k][1] ? std::sqrt(2.0) : 1.0;
                double skp = occ[kp][0] == occ[kp][1] ? std::sqrt(2.0) : 1.0;
                rho(k, kp) = G4(occ[k][0], occ[k][1], occ[kp][0], occ[kp][1]) / (sk * skp);
            }
        }
        tr += rho(k, k);
    }
    rho(0, 0) = 1.0 - tr;
    return rho;
}

template <class T>
void cw_effective_coefficients(const Density<T>& rho, CwOracleResult<T>& out) {
    const ChainBasis& B = *rho.basis;
    const int m = B.m();
    const long vac = B.vacuum_memory();
    out.diag = diagonal_sums(rho);
    T A(0.0), b(0.0);
    for (int a = 0; a < m; ++a) {
        long sa = B.single_memory(a);
        A += rho(B.join(sa, vac), B.join(vac, sa));
        // R(a, a) = sum_e <1_a, 1_e| rho |0, 1_e 1_a> with |2_e> carrying sqrt 2
        for (int e = 0; e < m; ++e) {
            long se = B.single_memory(e);
            long pair = memory_pair(B, e, a);
            double f = (e == a) ? std::sqrt(2.0) : 1.0;
            b += rho(B.join(sa, se), B.join(vac, pair)) * f;
        }
    }
    out.A_sum = 2.0 * A;
    // the block appears in both memory orders; average them
    T b2(0.0);
    for (int a = 0; a < m; ++a) {
        long sa = B.single_memory(a);
        for (int e = 0; e < m; ++e) {
            long se = B.single_memory(e);
            long pair = memory_pair(B, e, a);
            double f = (e == a) ? std::sqrt(2.0) : 1.0;
            b2 += rho(B.join(pair, vac), B.join(se, sa)) * f;
        }
    }
    out.B0 = b + b2;
}

template <class T>
CwOracleResult<T> simulate_cw_effective(double kappa_T, const T& x2, double eta2, int n, int bins) {
    if (n > 1) fail(ErrorKind::DimensionOverflow, "simulate_cw_effective: needs n <= 1");
    require(n >= 0, ErrorKind::Domain, "simulate_cw_effective: n must be >= 0");
    require(eta2 > 0.0 && eta2 <= 1.0, ErrorKind::Domain, "simulate_cw_effective: eta2 must lie in (0, 1]");
    CwBins cb = make_cw_bins(kappa_T, bins);
    ChainBasis B(bins, 2);
    Density<T> rho = cw_initial_state(B, cb, x2);
    CwOracleResult<T> res;
    for (int j = 0; j < n; ++j) {
        Density<T> next = swap(rho, rho, eta2);
        T tr = next.trace();
        res.swap_probs.push_back(2.0 * tr);
        for (auto& v : next.data) v = v / tr;
        rho = std::move(next);
    }
    cw_effective_coefficients(rho, res);
    ReadoutResult<T> r = readout(rho, rho, eta2);
    res.F = r.F;
    res.p_ps = r.p_ps;
    return res;
}

#define QREP_FOCK_INSTANTIATE(T)                                                                         \
    template struct Density<T>;                                                                          \
    template Diagonal<T> diagonal_sums(const Density<T>&);                                               \
    template Density<T> apply_loss(const Density<T>&, LossTarget, double);                               \
    template Density<T> swap(const Density<T>&, const Density<T>&, double);                             \
    template ReadoutResult<T> readout(const Density<T>&, const Density<T>&, double);                     \
    template Density<T> pulsed_initial_state(const ChainBasis&, const ModeDecomposition&, const T&);     \
    template Density<T> pulsed_ansatz(const ChainBasis&, const PulsedCoefficients<T>&,                   \
                                      const ModeDecomposition&);                                         \
    template PulsedCoefficients<T> extract_pulsed(const Density<T>&, const ModeDecomposition&, int,      \
                                                  double*);                                              \
    template PulsedOracleResult<T> simulate_pulsed(const ModeDecomposition&, const T&, double, int);     \
    template Density<T> cw_initial_state(const ChainBasis&, const CwBins&, const T&);                    \
    template void cw_effective_coefficients(const Density<T>&, CwOracleResult<T>&);                      \
    template CwOracleResult<T> simulate_cw_effective(double, const T&, double, int, int);

QREP_FOCK_INSTANTIATE(double)
QREP_FOCK_INSTANTIATE(Dual)

}  // namespace qrep::fock
