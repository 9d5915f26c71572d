#include "wicksde/chaos.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <memory>
#include <unordered_map>

namespace wicksde::chaos {

namespace {

constexpr int kMaxFact = 170;

const double* factorials() {
    static const auto table = [] {
        std::array<double, kMaxFact + 1> t{};
        t[0] = 1.0;
        for (int i = 1; i <= kMaxFact; ++i) t[i] = t[i - 1] * i;
        return t;
    }();
    return table.data();
}

double fact(int n) {
    if (n < 0 || n > kMaxFact) throw NumericError("chaos: factorial out of range");
    return factorials()[n];
}

constexpr int kChooseMax = 256;

double choose(int n, int k) {
    static const auto table = [] {
        auto t = std::make_unique<std::array<double, kChooseMax * kChooseMax>>();
        for (int i = 0; i < kChooseMax; ++i) {
            (*t)[i * kChooseMax] = 1.0;
            for (int j = 1; j <= i; ++j)
                (*t)[i * kChooseMax + j] =
                    (*t)[(i - 1) * kChooseMax + j - 1] +
                    ((j <= i - 1) ? (*t)[(i - 1) * kChooseMax + j] : 0.0);
        }
        return t;
    }();
    if (k < 0 || k > n) return 0.0;
    if (n >= kChooseMax) throw NumericError("chaos: binomial out of range");
    return (*table)[n * kChooseMax + k];
}

void check_compatible(const ChaosPoly& a, const ChaosPoly& b, const char* op) {
    if (a.nvars() != b.nvars() || a.bits_per_var() != b.bits_per_var() ||
        a.var_step() != b.var_step())
        throw ConfigError(std::string(op) + ": operands live on different spaces");
}

int pick_bits(int nvars, int requested) {
    if (requested == 4 || requested == 8) {
        if (nvars > 64 / requested)
            throw ConfigError("chaos: too many variables for requested layout");
        return requested;
    }
    if (requested != 0) throw ConfigError("chaos: bits_per_var must be 4 or 8");
    if (nvars <= 8) return 8;
    if (nvars <= 16) return 4;
    throw ConfigError(
        "chaos: explicit polynomials support at most 16 variables; "
        "larger studies use the sampling/scalar paths");
}

}  // namespace

ChaosPoly::ChaosPoly(int nvars, double var_step, int bits_per_var)
    : nvars_(nvars), bits_(pick_bits(nvars, bits_per_var)), var_step_(var_step) {
    if (nvars < 1) throw ConfigError("chaos: need at least one variable");
    if (!(var_step > 0.0)) throw ConfigError("chaos: variance step must be positive");
}

ChaosPoly ChaosPoly::constant(int nvars, double var_step, double c, int bits_per_var) {
    ChaosPoly p(nvars, var_step, bits_per_var);
    if (c != 0.0) p.terms_.push_back({0, c});
    return p;
}

ChaosPoly ChaosPoly::linear(std::span<const double> weights, double var_step,
                            int bits_per_var) {
    ChaosPoly p(static_cast<int>(weights.size()), var_step, bits_per_var);
    const int shift_step = p.bits_;
    const int top = 64 - shift_step;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0.0) continue;
        p.terms_.push_back({std::uint64_t{1} << (top - shift_step * static_cast<int>(i)),
                            weights[i]});
    }
    std::sort(p.terms_.begin(), p.terms_.end(),
              [](const Term& x, const Term& y) { return x.key < y.key; });
    return p;
}

int ChaosPoly::max_degree() const {
    int d = 0;
    for (const Term& t : terms_) d = std::max(d, key_degree(t.key));
    return d;
}

std::uint64_t ChaosPoly::encode(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != nvars_)
        throw ConfigError("chaos: multi-index length mismatch");
    const int maxd = max_bits_degree();
    std::uint64_t key = 0;
    for (int i = 0; i < nvars_; ++i) {
        if (alpha[i] < 0 || alpha[i] > maxd)
            throw ConfigError("chaos: multi-index entry out of layout range");
        key |= static_cast<std::uint64_t>(alpha[i]) << (64 - bits_ * (i + 1));
    }
    return key;
}

std::vector<int> ChaosPoly::decode(std::uint64_t key) const {
    std::vector<int> alpha(nvars_);
    const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    for (int i = 0; i < nvars_; ++i)
        alpha[i] = static_cast<int>((key >> (64 - bits_ * (i + 1))) & mask);
    return alpha;
}

int ChaosPoly::key_degree(std::uint64_t key) const {
    if (bits_ == 4) {
        key = (key & 0x0F0F0F0F0F0F0F0Full) + ((key >> 4) & 0x0F0F0F0F0F0F0F0Full);
    }
    key = (key * 0x0101010101010101ull) >> 56;
    return static_cast<int>(key);
}

double ChaosPoly::m2(std::uint64_t key) const {
    const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
    double f = 1.0;
    int total = 0;
    std::uint64_t k = key;
    while (k != 0) {
        const int lead = 63 - std::countl_zero(k);
        const int field = (63 - lead) / bits_;  // variable index from the top
        const int shift = 64 - bits_ * (field + 1);
        const int d = static_cast<int>((k >> shift) & mask);
        f *= fact(d);
        total += d;
        k &= ~(mask << shift);
    }
    return f * std::pow(var_step_, total);
}

double ChaosPoly::coeff(std::span<const int> alpha) const {
    const std::uint64_t key = encode(alpha);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const Term& t, std::uint64_t k) { return t.key < k; });
    return (it != terms_.end() && it->key == key) ? it->coeff : 0.0;
}

void ChaosPoly::set_coeff(std::span<const int> alpha, double c) {
    const std::uint64_t key = encode(alpha);
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [](const Term& t, std::uint64_t k) { return t.key < k; });
    if (it != terms_.end() && it->key == key) {
        if (c == 0.0)
            terms_.erase(it);
        else
            it->coeff = c;
    } else if (c != 0.0) {
        terms_.insert(it, {key, c});
    }
}

double ChaosPoly::norm2() const {
    double acc = 0.0;
    for (const Term& t : terms_) acc += t.coeff * t.coeff * m2(t.key);
    return acc;
}

double ChaosPoly::expectation() const {
    return terms_.empty() || terms_.front().key != 0 ? 0.0 : terms_.front().coeff;
}

std::string ChaosPoly::debug_string() const {
    std::string out;
    char buf[64];
    for (const Term& t : terms_) {
        const auto alpha = decode(t.key);
        out += '(';
        for (int i = 0; i < nvars_; ++i) {
            if (i) out += ',';
            out += std::to_string(alpha[i]);
        }
        std::snprintf(buf, sizeof(buf), ") : %.12g\n", t.coeff);
        out += buf;
    }
    return out;
}

void ChaosPoly::assign(std::vector<Term> terms, const Caps& caps) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& x, const Term& y) { return x.key < y.key; });
    // coalesce duplicate keys before measuring mass: cancellation between
    // repeated entries is algebra, not truncation
    size_t out = 0;
    for (size_t i = 0; i < terms.size();) {
        Term t = terms[i++];
        while (i < terms.size() && terms[i].key == t.key) t.coeff += terms[i++].coeff;
        terms[out++] = t;
    }
    terms.resize(out);
    double total = 0.0;
    for (const Term& t : terms) total += t.coeff * t.coeff * m2(t.key);
    const double cutoff = caps.prune_threshold * total;
    terms_.clear();
    terms_.reserve(terms.size());
    for (const Term& t : terms) {
        const double mass = t.coeff * t.coeff * m2(t.key);
        if (t.coeff != 0.0 && mass >= cutoff)
            terms_.push_back(t);
        else
            dropped_mass_ += mass;
    }
}

ChaosPoly wick_mul(const ChaosPoly& a, const ChaosPoly& b, const Caps& caps) {
    check_compatible(a, b, "wick_mul");
    if (caps.degree > a.max_bits_degree())
        throw ConfigError("wick_mul: degree cap exceeds index layout");
    ChaosPoly out(a.nvars(), a.var_step(), a.bits_per_var());
    out.add_dropped(a.dropped_mass() + b.dropped_mass());

    std::vector<int> deg_b(b.terms().size());
    for (size_t j = 0; j < b.terms().size(); ++j) deg_b[j] = b.key_degree(b.terms()[j].key);

    std::unordered_map<std::uint64_t, double> acc;
    acc.reserve(a.terms().size() * 2 + b.terms().size() * 2);
    for (const auto& ta : a.terms()) {
        const int da = a.key_degree(ta.key);
        for (size_t j = 0; j < b.terms().size(); ++j) {
            const auto& tb = b.terms()[j];
            const double c = ta.coeff * tb.coeff;
            if (da + deg_b[j] > caps.degree) {
                // both indices decoded to get the exact mass of the drop
                const auto al = a.decode(ta.key);
                const auto be = b.decode(tb.key);
                double f = 1.0;
                for (int i = 0; i < a.nvars(); ++i) f *= fact(al[i] + be[i]);
                out.add_dropped(c * c * f * std::pow(a.var_step(), da + deg_b[j]));
                continue;
            }
            acc[ta.key + tb.key] += c;
        }
    }
    std::vector<ChaosPoly::Term> terms;
    terms.reserve(acc.size());
    for (const auto& [k, v] : acc) terms.push_back({k, v});
    out.assign(std::move(terms), caps);
    return out;
}

ChaosPoly ordinary_mul(const ChaosPoly& a, const ChaosPoly& b, const Caps& caps) {
    check_compatible(a, b, "ordinary_mul");
    if (caps.degree > a.max_bits_degree())
        throw ConfigError("ordinary_mul: degree cap exceeds index layout");
    ChaosPoly out(a.nvars(), a.var_step(), a.bits_per_var());
    out.add_dropped(a.dropped_mass() + b.dropped_mass());
    const int n = a.nvars();
    const double v = a.var_step();

    std::vector<std::vector<int>> bdec(b.terms().size());
    for (size_t j = 0; j < b.terms().size(); ++j) bdec[j] = b.decode(b.terms()[j].key);

    std::unordered_map<std::uint64_t, double> acc;
    acc.reserve(a.terms().size() * 2 + b.terms().size() * 2);
    std::vector<int> gamma(n);

    // Enumerates contraction vectors r (0 <= r_i <= min(alpha_i, beta_i)) for a
    // fixed pair, accumulating prod C(a_i,r_i) C(b_i,r_i) r_i! v^{r_i}.
    const auto expand = [&](const std::vector<int>& al, const std::vector<int>& be,
                            double base) {
        struct Frame {
            int var;
            double coef;
        };
        std::vector<int> overlap;
        for (int i = 0; i < n; ++i) {
            gamma[i] = al[i] + be[i];
            if (al[i] > 0 && be[i] > 0) overlap.push_back(i);
        }
        const auto emit = [&](double coef) {
            int total = 0;
            for (int i = 0; i < n; ++i) total += gamma[i];
            if (total > caps.degree) {
                double f = 1.0;
                for (int i = 0; i < n; ++i) f *= fact(gamma[i]);
                out.add_dropped(coef * coef * f * std::pow(v, total));
                return;
            }
            acc[out.encode(gamma)] += coef;
        };
        const auto rec = [&](auto&& self, size_t oi, double coef) -> void {
            if (oi == overlap.size()) {
                emit(coef);
                return;
            }
            const int i = overlap[oi];
            const int ai = al[i], bi = be[i];
            double vr = 1.0;
            for (int r = 0; r <= std::min(ai, bi); ++r) {
                gamma[i] = ai + bi - 2 * r;
                self(self, oi + 1, coef * choose(ai, r) * choose(bi, r) * fact(r) * vr);
                vr *= v;
            }
            gamma[i] = ai + bi;
        };
        rec(rec, 0, base);
    };

    for (const auto& ta : a.terms()) {
        const auto al = a.decode(ta.key);
        for (size_t j = 0; j < b.terms().size(); ++j)
            expand(al, bdec[j], ta.coeff * b.terms()[j].coeff);
    }
    std::vector<ChaosPoly::Term> terms;
    terms.reserve(acc.size());
    for (const auto& [k, val] : acc) terms.push_back({k, val});
    out.assign(std::move(terms), caps);
    return out;
}

ChaosPoly wick_power_linear(std::span<const double> weights, double var_step, int m,
                            const Caps& caps, int bits_per_var) {
    const int n = static_cast<int>(weights.size());
    ChaosPoly out(n, var_step, bits_per_var);
    if (m < 0) throw ConfigError("wick_power_linear: negative power");
    if (m > caps.degree) return out;  // entirely above the cap
    std::vector<ChaosPoly::Term> terms;
    std::vector<int> alpha(n, 0);
    const double mfact = fact(m);
    const auto rec = [&](auto&& self, int var, int left, double wprod, double denom) -> void {
        if (var == n - 1) {
            if (left > 0 && weights[var] == 0.0) return;
            alpha[var] = left;
            double w = wprod;
            for (int i = 0; i < left; ++i) w *= weights[var];
            terms.push_back({out.encode(alpha), mfact / (denom * fact(left)) * w});
            alpha[var] = 0;
            return;
        }
        double w = wprod;
        for (int d = 0; d <= left; ++d) {
            if (d > 0 && weights[var] == 0.0) break;
            alpha[var] = d;
            self(self, var + 1, left - d, w, denom * fact(d));
            w *= weights[var];
        }
        alpha[var] = 0;
    };
    if (n == 0) throw ConfigError("wick_power_linear: empty weight vector");
    rec(rec, 0, m, 1.0, 1.0);
    out.assign(std::move(terms), caps);
    return out;
}

ChaosPoly wick_power_linear_recursive(std::span<const double> weights, double var_step,
                                      int m, const Caps& caps, int bits_per_var) {
    const int n = static_cast<int>(weights.size());
    ChaosPoly prev = ChaosPoly::constant(n, var_step, 1.0, bits_per_var);
    if (m == 0) return prev;
    ChaosPoly lin = ChaosPoly::linear(weights, var_step, bits_per_var);
    if (m > caps.degree) return ChaosPoly(n, var_step, bits_per_var);
    double v = 0.0;
    for (double w : weights) v += w * w;
    v *= var_step;
    ChaosPoly cur = lin;
    for (int k = 1; k < m; ++k) {
        // h^{k+1} = x h^k - k v h^{k-1}, with the ordinary product for x h^k
        ChaosPoly next = ordinary_mul(lin, cur, caps);
        std::vector<ChaosPoly::Term> terms(next.terms().begin(), next.terms().end());
        for (const auto& t : prev.terms()) terms.push_back({t.key, -k * v * t.coeff});
        ChaosPoly merged(n, var_step, bits_per_var);
        merged.add_dropped(next.dropped_mass());
        merged.assign(std::move(terms), caps);
        prev = std::move(cur);
        cur = std::move(merged);
    }
    return cur;
}

ChaosPoly wick_exp(const ChaosPoly& a, const Caps& caps, bool* nonzero_mean) {
    if (nonzero_mean) *nonzero_mean = a.expectation() != 0.0;
    ChaosPoly result = ChaosPoly::constant(a.nvars(), a.var_step(), 1.0, a.bits_per_var());
    ChaosPoly power = a;
    double inv_fact = 1.0;
    for (int m = 1; m <= caps.degree; ++m) {
        inv_fact /= m;
        std::vector<ChaosPoly::Term> terms(result.terms().begin(), result.terms().end());
        for (const auto& t : power.terms()) terms.push_back({t.key, inv_fact * t.coeff});
        ChaosPoly merged(a.nvars(), a.var_step(), a.bits_per_var());
        merged.add_dropped(result.dropped_mass() + power.dropped_mass() * inv_fact * inv_fact);
        merged.assign(std::move(terms), caps);
        result = std::move(merged);
        if (m < caps.degree) {
            power = wick_mul(power, a, caps);
            if (power.term_count() == 0) break;
            // series tail negligible -> stop early
            if (power.norm2() * inv_fact * inv_fact / ((m + 1.0) * (m + 1.0)) <
                1e-32 * std::max(result.norm2(), 1e-300))
                break;
        }
    }
    return result;
}

double hermite_eval(int k, double alpha, double x) {
    if (k < 0) throw ConfigError("hermite_eval: negative degree");
    if (alpha < 0.0) throw ConfigError("hermite_eval: negative variance");
    if (k == 0) return 1.0;
    double hm1 = 1.0, h = x;
    for (int m = 1; m < k; ++m) {
        const double next = x * h - m * alpha * hm1;
        hm1 = h;
        h = next;
    }
    return h;
}

std::vector<std::vector<double>> hermite_table(std::span<const double> x, double var,
                                               int maxdeg) {
    std::vector<std::vector<double>> table(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        auto& row = table[i];
        row.resize(maxdeg + 1);
        row[0] = 1.0;
        if (maxdeg >= 1) row[1] = x[i];
        for (int m = 1; m < maxdeg; ++m) row[m + 1] = x[i] * row[m] - m * var * row[m - 1];
    }
    return table;
}

double eval_with_table(const ChaosPoly& a,
                       const std::vector<std::vector<double>>& table) {
    const int bits = a.bits_per_var();
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    double acc = 0.0;
    for (const auto& t : a.terms()) {
        double prod = t.coeff;
        std::uint64_t k = t.key;
        while (k != 0) {
            const int lead = 63 - std::countl_zero(k);
            const int field = (63 - lead) / bits;
            const int shift = 64 - bits * (field + 1);
            const int d = static_cast<int>((k >> shift) & mask);
            prod *= table[field][d];
            k &= ~(mask << shift);
        }
        acc += prod;
    }
    return acc;
}

double eval_at(const ChaosPoly& a, std::span<const double> x) {
    if (static_cast<int>(x.size()) != a.nvars())
        throw ConfigError("eval_at: coordinate count mismatch");
    return eval_with_table(a, hermite_table(x, a.var_step(), a.max_degree()));
}

double expectation(const ChaosPoly& a) { return a.expectation(); }

double inner_product(const ChaosPoly& a, const ChaosPoly& b) {
    check_compatible(a, b, "inner_product");
    double acc = 0.0;
    size_t i = 0, j = 0;
    while (i < a.terms().size() && j < b.terms().size()) {
        const auto& ta = a.terms()[i];
        const auto& tb = b.terms()[j];
        if (ta.key < tb.key) {
            ++i;
        } else if (tb.key < ta.key) {
            ++j;
        } else {
            acc += ta.coeff * tb.coeff * a.m2(ta.key);
            ++i;
            ++j;
        }
    }
    return acc;
}

ChaosPoly project_level(const ChaosPoly& a, int k) {
    if (k < 0) throw ConfigError("project_level: negative level");
    ChaosPoly out(a.nvars(), a.var_step(), a.bits_per_var());
    std::vector<ChaosPoly::Term> terms;
    for (const auto& t : a.terms())
        if (a.key_degree(t.key) == k) terms.push_back(t);
    out.assign(std::move(terms), Caps{a.max_bits_degree(), 0.0});
    return out;
}

ChaosPoly gamma(const ChaosPoly& a, double r) {
    ChaosPoly out(a.nvars(), a.var_step(), a.bits_per_var());
    std::vector<ChaosPoly::Term> terms;
    terms.reserve(a.terms().size());
    for (const auto& t : a.terms())
        terms.push_back({t.key, t.coeff * std::pow(r, a.key_degree(t.key))});
    out.assign(std::move(terms), Caps{a.max_bits_degree(), 0.0});
    return out;
}

double s_transform(const ChaosPoly& a, std::span<const double> cell_integrals) {
    if (static_cast<int>(cell_integrals.size()) != a.nvars())
        throw ConfigError("s_transform: argument length mismatch");
    double acc = 0.0;
    for (const auto& t : a.terms()) {
        const auto alpha = a.decode(t.key);
        double prod = t.coeff;
        for (int i = 0; i < a.nvars(); ++i)
            for (int d = 0; d < alpha[i]; ++d) prod *= cell_integrals[i];
        acc += prod;
    }
    return acc;
}

}  // namespace wicksde::chaos
