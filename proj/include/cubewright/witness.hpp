#pragma once

#include <array>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cubewright/algebra.hpp"
#include "cubewright/closure.hpp"
#include "cubewright/congruence.hpp"
#include "cubewright/cubeterm.hpp"
#include "cubewright/maltsev.hpp"

namespace cubewright {

// One replayed assertion. Every "pass" is backed by the re-evaluations
// recorded in the transcript.
struct ReplayCheck {
    std::string name;
    std::string status;  // "pass" | "fail" | "skipped"
    std::string detail;
    std::vector<std::string> transcript;

    bool passed() const { return status == "pass"; }
    bool failed() const { return status == "fail"; }
};

struct WindowOptions {
    CubeOptions cube;
    // Representatives of the two merged generator families: the congruence
    // is generated by (g[s1],g[s2]) and (g[t1],g[t2]).
    std::array<int, 4> merge_reps{1, 3, 2, 4};
    CarrierAlgebra::Budget carrier_budget;
};

// The finite window of the construction: coordinates -n..0 (one per element
// of the universe, the enumeration block) followed by 1..N. Generator i
// carries the enumeration pattern on the block, the blocker element b at
// window slot i, and a everywhere else; the trace element carries the
// enumeration pattern and a across the whole window. The carrier is the
// plain subpower closure of the generators.
class WindowInstance {
public:
    WindowInstance(const FiniteAlgebra& algebra, const CubeAnalysis& analysis, int window,
                   WindowOptions options = {})
        : alg_(algebra), options_(options), window_(window) {
        if (window < 4) throw usage_error("window must be at least 4");
        if (analysis.status != CubeStatus::BlockerCertified &&
            analysis.status != CubeStatus::BlockerCandidate) {
            throw usage_error("window construction needs a blocker-bearing analysis");
        }
        for (int r : options_.merge_reps) {
            if (r < 1 || r > window) throw usage_error("merge representative outside the window");
        }
        std::vector<Elem> b_min = minimal_no_cube_subuniverse(alg_, analysis, options_.cube);
        selection_ = pick_blocker_witness(alg_, analysis, b_min, options_.cube);

        enum_len_ = alg_.size;         // coordinates -n..0, n = |A|-1
        k_ = enum_len_ + window_;
        std::vector<Elem> buf(k_);
        for (int i = 1; i <= window_; ++i) {
            fill_window_tuple(buf, {{i, selection_.low_b}});
            generators_.push_back(encode_tuple(buf, alg_.size));
        }
        fill_window_tuple(buf, {});
        trace_ = encode_tuple(buf, alg_.size);

        SubpowerClosure closure(alg_, k_, generators_, options_.cube.limits, true);
        trace_in_carrier_ = closure.contains(trace_);
        if (trace_in_carrier_) {
            trace_term_ = closure.term_for(trace_);
        }
        carrier_ = std::make_unique<CarrierAlgebra>(alg_, k_, closure.codes_in_insertion_order(),
                                                    options_.carrier_budget);
        for (Code g : generators_) {
            generator_index_.push_back(*carrier_->index_of(g));
        }
    }

    const FiniteAlgebra& algebra() const { return alg_; }
    const WitnessSelection& selection() const { return selection_; }
    const CarrierAlgebra& carrier() const { return *carrier_; }
    int window() const { return window_; }
    int width() const { return k_; }
    int enumeration_length() const { return enum_len_; }
    Elem a() const { return selection_.low_a; }
    Elem b() const { return selection_.low_b; }
    Code trace() const { return trace_; }
    const std::vector<Code>& generators() const { return generators_; }
    const std::vector<int>& generator_indices() const { return generator_index_; }
    const std::array<int, 4>& merge_reps() const { return options_.merge_reps; }
    const WindowOptions& options() const { return options_; }

    // Coordinate labels in order: -n..0 then 1..N.
    std::vector<int> coordinate_labels() const {
        std::vector<int> out;
        for (int j = -(enum_len_ - 1); j <= 0; ++j) out.push_back(j);
        for (int j = 1; j <= window_; ++j) out.push_back(j);
        return out;
    }

    // Element with the enumeration block, the given values at the listed
    // window slots, and a elsewhere.
    Code window_element(const std::vector<std::pair<int, Elem>>& slots) const {
        std::vector<Elem> buf(k_);
        fill_window_tuple(buf, slots);
        return encode_tuple(buf, alg_.size);
    }

    // All listed slots set to b.
    Code window_element_b(const std::vector<int>& slots) const {
        std::vector<std::pair<int, Elem>> values;
        for (int s : slots) values.emplace_back(s, selection_.low_b);
        return window_element(values);
    }

    bool trace_in_carrier() const { return trace_in_carrier_; }
    const std::optional<Term>& trace_term() const { return trace_term_; }

    std::string render_code(Code c) const {
        std::vector<Elem> buf(k_);
        decode_tuple(c, alg_.size, buf);
        std::ostringstream out;
        out << "(";
        for (int p = 0; p < k_; ++p) {
            if (p == enum_len_) out << " |";
            if (p) out << " ";
            out << static_cast<int>(buf[p]);
        }
        out << ")";
        return out.str();
    }

private:
    void fill_window_tuple(std::vector<Elem>& buf, const std::vector<std::pair<int, Elem>>& slots) const {
        // enumeration block: coordinate -j holds element j, so positions
        // 0..n carry n, n-1, ..., 0
        for (int p = 0; p < enum_len_; ++p) buf[p] = static_cast<Elem>(enum_len_ - 1 - p);
        for (int j = 1; j <= window_; ++j) buf[enum_len_ + j - 1] = selection_.low_a;
        for (const auto& [slot, value] : slots) {
            if (slot < 1 || slot > window_) throw usage_error("window slot out of range");
            buf[enum_len_ + slot - 1] = value;
        }
    }

    FiniteAlgebra alg_;
    WindowOptions options_;
    int window_ = 0;
    int enum_len_ = 0;
    int k_ = 0;
    WitnessSelection selection_;
    std::vector<Code> generators_;
    std::vector<int> generator_index_;
    Code trace_ = 0;
    bool trace_in_carrier_ = false;
    std::optional<Term> trace_term_;
    std::unique_ptr<CarrierAlgebra> carrier_;
};

// Membership of the trace element in the carrier. Expected false whenever
// the blocker data is genuine: a membership term would be forced idempotent
// by the enumeration block (every universe element repeats down those
// coordinates), and on the window block it would send the one-b generator
// columns to the constant-a row, certifying a below b in the pair order and
// contradicting the selection. The window therefore inherits the full
// construction's conclusion at every size. Callers assert the value.
inline bool trace_element_in_carrier(const WindowInstance& instance) {
    return instance.trace_in_carrier();
}

namespace detail {

inline int require_member(const WindowInstance& inst, Code c, const std::string& what) {
    auto idx = inst.carrier().index_of(c);
    if (!idx) {
        throw inconsistency_error(what + " " + inst.render_code(c) + " is not in the carrier");
    }
    return *idx;
}

// Coordinatewise application of a term to carrier elements.
inline Code eval_term_on_window(const WindowInstance& inst, const Term& term,
                                const std::vector<Code>& args) {
    const FiniteAlgebra& alg = inst.algebra();
    int k = inst.width();
    std::vector<std::vector<Elem>> digits(args.size(), std::vector<Elem>(k));
    for (std::size_t i = 0; i < args.size(); ++i) decode_tuple(args[i], alg.size, digits[i]);
    std::vector<Elem> out(k), point(args.size());
    for (int coord = 0; coord < k; ++coord) {
        for (std::size_t i = 0; i < args.size(); ++i) point[i] = digits[i][coord];
        out[coord] = term.evaluate(alg, point);
    }
    return encode_tuple(out, alg.size);
}

inline std::string render_application(const WindowInstance& inst, const std::string& label,
                                      const std::vector<Code>& args, Code result) {
    std::ostringstream out;
    out << label << ":";
    for (Code a : args) out << " " << inst.render_code(a);
    out << " -> " << inst.render_code(result);
    return out.str();
}

// Term with t(first, second) == target inside the idempotent clone,
// reconstructed from the pair closure; nullopt when the pair does not
// generate the target.
inline std::optional<Term> pair_generation_term(const FiniteAlgebra& alg, Elem first, Elem second,
                                                Elem target, const ClosureLimits& limits) {
    IdempotentClosure closure(alg, 1, {static_cast<Code>(first), static_cast<Code>(second)}, limits,
                              true);
    if (!closure.contains(static_cast<Code>(target))) return std::nullopt;
    Term t = closure.term_for(static_cast<Code>(target));
    std::vector<Elem> check{first, second};
    if (t.evaluate(alg, check) != target) {
        throw inconsistency_error("pair generation term failed re-evaluation");
    }
    return t;
}

} // namespace detail

// The congruence every replay runs against: generated by identifying the two
// s-representative generators and the two t-representative generators. Any
// congruence whose restriction to the generator set has those blocks
// contains it, so assertions proved here transfer upward.
inline Partition replay_congruence(const WindowInstance& inst) {
    const auto& reps = inst.merge_reps();
    const auto& gi = inst.generator_indices();
    return generated_congruence(inst.carrier(), {{gi[reps[0] - 1], gi[reps[1] - 1]},
                                                 {gi[reps[2] - 1], gi[reps[3] - 1]}});
}

// Replays the block-collapse argument: all doubly and triply marked window
// elements built from the four representatives fall into a single block of
// the replay congruence, and the generating equalities behind that collapse
// re-evaluate coordinatewise on the window through a weak near-unanimity
// term w and pair-generation terms t, s.
inline ReplayCheck replay_block_collapse(const WindowInstance& inst, int wnu_arity_max = 4) {
    ReplayCheck check;
    check.name = "block_collapse";
    const FiniteAlgebra& alg = inst.algebra();
    const auto& reps = inst.merge_reps();
    const int s1 = reps[0], s2 = reps[1], t1 = reps[2], t2 = reps[3];

    // the argument needs a weak near-unanimity term
    std::optional<Term> wnu;
    int wnu_arity = 0;
    for (int n = 2; n <= wnu_arity_max; ++n) {
        WnuResult r = find_wnu(alg, n, inst.options().cube.limits);
        if (r.status == SearchStatus::Found) {
            wnu = r.term;
            wnu_arity = n;
            break;
        }
    }
    if (!wnu) {
        check.status = "skipped";
        check.detail = "no weak near-unanimity term of arity <= " + std::to_string(wnu_arity_max) +
                       "; the collapse argument does not apply";
        return check;
    }
    check.transcript.push_back("wnu arity " + std::to_string(wnu_arity) + ": " + wnu->to_string());

    Partition theta = replay_congruence(inst);

    // semantic layer: the 4 + 16 marked elements share one block
    std::vector<Code> members;
    for (int m : {s1, s2}) {
        for (int n : {t1, t2}) {
            members.push_back(inst.window_element_b({m, n}));
        }
    }
    for (int m : {s1, s2}) {
        for (int n : {t1, t2}) {
            for (int kk : {s1, s2, t1, t2}) {
                members.push_back(inst.window_element_b({m, n, kk}));
            }
        }
    }
    int root = -1;
    for (Code c : members) {
        int idx = detail::require_member(inst, c, "marked element");
        if (root < 0) root = theta.root_of(idx);
        if (theta.root_of(idx) != root) {
            check.status = "fail";
            check.detail = "marked element " + inst.render_code(c) + " escaped the collapse block";
            return check;
        }
    }
    check.transcript.push_back("all " + std::to_string(members.size()) +
                               " marked elements share one congruence block");

    // transcript layer
    const Elem a = inst.a(), b = inst.b();
    auto in_d = [&](Elem e) {
        for (Elem x : inst.selection().d) {
            if (x == e) return true;
        }
        return false;
    };
    std::vector<Elem> point(wnu_arity, a);
    point[0] = b;
    Elem c_val = wnu->evaluate(alg, point);
    point.assign(wnu_arity, b);
    point[0] = a;
    Elem d_val = wnu->evaluate(alg, point);
    check.transcript.push_back("c = w(b,a,...,a) = " + std::to_string(int(c_val)) +
                               ", d = w(a,b,...,b) = " + std::to_string(int(d_val)));
    if (!in_d(c_val) || !in_d(d_val)) {
        check.status = "fail";
        check.detail = "absorbed values escaped D";
        return check;
    }

    std::optional<Term> t_term = detail::pair_generation_term(alg, c_val, a, b, inst.options().cube.limits);
    if (!t_term) {
        check.status = "fail";
        check.detail = "no idempotent term sends (c,a) to b; the pair fails to generate the "
                       "minimal subuniverse and the selection is wrong";
        return check;
    }
    std::vector<Elem> db{d_val, b};
    Elem e_val = t_term->evaluate(alg, db);
    check.transcript.push_back("t = " + t_term->to_string() + ", e = t(d,b) = " +
                               std::to_string(int(e_val)));
    if (!in_d(e_val)) {
        check.status = "fail";
        check.detail = "t(d,b) escaped D";
        return check;
    }
    std::optional<Term> s_term = detail::pair_generation_term(alg, e_val, a, b, inst.options().cube.limits);
    if (!s_term) {
        check.status = "fail";
        check.detail = "no idempotent term sends (e,a) to b";
        return check;
    }
    check.transcript.push_back("s = " + s_term->to_string());

    // the six displayed window equalities
    Code g_s1 = inst.generators()[s1 - 1];
    Code g_t1 = inst.generators()[t1 - 1];
    Code g_s2 = inst.generators()[s2 - 1];
    Code pair_cd = inst.window_element({{s1, c_val}, {t1, d_val}});
    Code pair_be = inst.window_element({{s1, b}, {t1, e_val}});
    Code pair_bb = inst.window_element_b({s1, t1});
    Code triple_ccd = inst.window_element({{s1, c_val}, {t1, c_val}, {s2, d_val}});
    Code triple_bbe = inst.window_element({{s1, b}, {t1, b}, {s2, e_val}});
    Code triple_bbb = inst.window_element_b({s1, t1, s2});

    struct Step {
        std::string label;
        const Term* term;
        std::vector<Code> args;
        Code want;
    };
    std::vector<Code> w_args1{g_s1};
    std::vector<Code> w_args2{pair_bb};
    for (int i = 1; i < wnu_arity; ++i) {
        w_args1.push_back(g_t1);
        w_args2.push_back(g_s2);
    }
    std::vector<Step> steps{
        {"w(g" + std::to_string(s1) + ", g" + std::to_string(t1) + ", ...)", &*wnu, w_args1, pair_cd},
        {"t(., g" + std::to_string(t1) + ")", &*t_term, {pair_cd, g_t1}, pair_be},
        {"s(., g" + std::to_string(s1) + ")", &*s_term, {pair_be, g_s1}, pair_bb},
        {"w(., g" + std::to_string(s2) + ", ...)", &*wnu, w_args2, triple_ccd},
        {"t(., g" + std::to_string(s2) + ")", &*t_term, {triple_ccd, g_s2}, triple_bbe},
        {"s(., pair)", &*s_term, {triple_bbe, pair_bb}, triple_bbb},
    };
    for (const Step& step : steps) {
        Code got = detail::eval_term_on_window(inst, *step.term, step.args);
        check.transcript.push_back(detail::render_application(inst, step.label, step.args, got));
        if (got != step.want) {
            check.status = "fail";
            check.detail = "window equality " + step.label + " produced " + inst.render_code(got) +
                           ", expected " + inst.render_code(step.want);
            return check;
        }
        detail::require_member(inst, got, "step result");
    }

    check.status = "pass";
    check.detail = "collapse block verified with wnu arity " + std::to_string(wnu_arity);
    return check;
}

// Replays the generator-merge argument with an omit-{1,5} chain: stepping
// the chain through the window elements merges the two representative
// generators inside the replay congruence. Even steps re-evaluate exactly,
// odd steps re-evaluate on the mixed arguments whose congruence links come
// from the collapse block.
inline ReplayCheck replay_generator_merge(const WindowInstance& inst, const Omit15Chain& chain) {
    ReplayCheck check;
    check.name = "generator_merge";
    const auto& reps = inst.merge_reps();
    const int s1 = reps[0], s2 = reps[1], t1 = reps[2], t2 = reps[3];

    Partition theta = replay_congruence(inst);
    const auto& gi = inst.generator_indices();

    Code pair12 = inst.window_element_b({s1, t1});
    Code pair34 = inst.window_element_b({s2, t2});
    Code triple234 = inst.window_element_b({t1, s2, t2});
    Code triple134 = inst.window_element_b({s1, s2, t2});
    int idx_pair12 = detail::require_member(inst, pair12, "pair element");
    int idx_pair34 = detail::require_member(inst, pair34, "pair element");
    int idx_triple234 = detail::require_member(inst, triple234, "triple element");
    int idx_triple134 = detail::require_member(inst, triple134, "triple element");

    // congruence links borrowed from the collapse block
    for (auto [label, idx] : {std::pair<const char*, int>{"pair/pair34", idx_pair34},
                              {"pair/triple234", idx_triple234},
                              {"pair/triple134", idx_triple134}}) {
        if (!theta.related(idx_pair12, idx)) {
            check.status = "fail";
            check.detail = std::string("missing congruence link ") + label;
            return check;
        }
    }

    auto run_half = [&](Code start, Code odd_third, Code odd_fourth, const std::string& label) -> bool {
        for (std::size_t i = 0; i + 1 < chain.terms.size(); ++i) {
            std::vector<Code> args;
            if (i % 2 == 0) {
                args = {start, pair12, pair12, pair12};
            } else {
                args = {start, pair12, odd_third, odd_fourth};
            }
            Code lhs = detail::eval_term_on_window(inst, chain.terms[i], args);
            Code rhs = detail::eval_term_on_window(inst, chain.terms[i + 1], args);
            check.transcript.push_back(detail::render_application(
                inst, label + " step " + std::to_string(i) + " f" + std::to_string(i), args, lhs));
            if (lhs != rhs) {
                check.status = "fail";
                check.detail = label + " step " + std::to_string(i) + " failed to re-evaluate";
                return false;
            }
        }
        return true;
    };
    if (!run_half(inst.generators()[s1 - 1], pair34, triple234, "s-half")) return check;
    if (!run_half(inst.generators()[t1 - 1], pair34, triple134, "t-half")) return check;

    // endpoints: f_0 picks out the start, f_{2m+1} picks out the pair element
    if (!theta.related(gi[s1 - 1], idx_pair12) || !theta.related(gi[t1 - 1], idx_pair12) ||
        !theta.related(gi[s1 - 1], gi[t1 - 1])) {
        check.status = "fail";
        check.detail = "representative generators failed to merge in the replay congruence";
        return check;
    }
    check.status = "pass";
    check.detail = "generators g" + std::to_string(s1) + " and g" + std::to_string(t1) +
                   " merge under the replay congruence";
    return check;
}

// Scans congruences of the carrier and asserts that each restriction to the
// generator set has at most one block of size above 1. Projection kernels
// are always scanned; the full congruence lattice is enumerated when the
// carrier is small enough, otherwise randomly generated congruences fill the
// budget. A fail records the first offending congruence.
inline ReplayCheck check_unique_large_block(const WindowInstance& inst, int sample_budget = 64,
                                            int enumeration_cap = 60,
                                            std::uint64_t sample_seed = 0x5eed) {
    ReplayCheck check;
    check.name = "unique_large_block";
    const std::vector<int>& c0 = inst.generator_indices();
    const int threshold = 1;  // the constant bound used by the construction

    auto violates = [&](const Partition& theta, std::string& where) {
        Partition restricted = theta.restrict_to(c0);
        auto [count, blocks] = block_profile(restricted, threshold);
        if (count <= 1) return false;
        std::ostringstream out;
        out << count << " blocks of size > 1 on the generator set; blocks:";
        for (const auto& blk : blocks) {
            out << " {";
            for (std::size_t i = 0; i < blk.size(); ++i) out << (i ? "," : "") << "g" << (blk[i] + 1);
            out << "}";
        }
        where = out.str();
        return true;
    };

    std::string where;
    std::vector<int> labels = inst.coordinate_labels();
    for (int p = 0; p < inst.width(); ++p) {
        Partition ker = kernel_of_projection(inst.carrier(), p);
        if (violates(ker, where)) {
            check.status = "fail";
            check.detail = "projection kernel at coordinate " + std::to_string(labels[p]) + ": " + where;
            return check;
        }
    }
    check.transcript.push_back("all " + std::to_string(inst.width()) + " projection kernels pass");

    if (inst.carrier().size() <= enumeration_cap) {
        std::vector<Partition> lattice = all_congruences(inst.carrier(), enumeration_cap);
        for (const Partition& theta : lattice) {
            if (violates(theta, where)) {
                check.status = "fail";
                check.detail = "congruence with index " + std::to_string(theta.index()) + ": " + where;
                check.transcript.push_back("violating congruence found among " +
                                           std::to_string(lattice.size()) + " congruences");
                return check;
            }
        }
        check.transcript.push_back("all " + std::to_string(lattice.size()) + " congruences pass");
    } else {
        std::mt19937_64 rng(sample_seed);
        for (int s = 0; s < sample_budget; ++s) {
            std::vector<std::pair<int, int>> pairs;
            int npairs = 1 + static_cast<int>(rng() % 2);
            for (int i = 0; i < npairs; ++i) {
                int x = static_cast<int>(rng() % inst.carrier().size());
                int y = static_cast<int>(rng() % inst.carrier().size());
                pairs.emplace_back(x, y);
            }
            Partition theta = generated_congruence(inst.carrier(), pairs);
            if (violates(theta, where)) {
                check.status = "fail";
                check.detail = "sampled congruence: " + where;
                return check;
            }
        }
        check.transcript.push_back("carrier above the enumeration cap; " +
                                   std::to_string(sample_budget) + " sampled congruences pass");
    }
    check.status = "pass";
    check.detail = "no congruence showed two large blocks on the generator set";
    return check;
}

// Rebuilds the trace element by the projection-kernel recipe: at each
// coordinate, restrict the kernel to the generator set, find the unique
// block of size above 1, and read the coordinate off any of its members.
// Returns the rebuilt code; throws when some coordinate lacks a unique
// large block.
inline Code derive_trace_from_kernels(const WindowInstance& inst) {
    const std::vector<int>& c0 = inst.generator_indices();
    std::vector<Elem> out(inst.width());
    for (int p = 0; p < inst.width(); ++p) {
        Partition ker = kernel_of_projection(inst.carrier(), p);
        Partition restricted = ker.restrict_to(c0);
        auto [count, blocks] = block_profile(restricted, 1);
        if (count != 1) {
            throw inconsistency_error("coordinate " + std::to_string(p) +
                                      ": expected a unique large kernel block, found " +
                                      std::to_string(count));
        }
        int member = c0[blocks[0][0]];
        out[p] = inst.carrier().digits(member)[p];
    }
    return encode_tuple(out, inst.algebra().size);
}

} // namespace cubewright
