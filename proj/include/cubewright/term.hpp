#pragma once

#include <cctype>
#include <functional>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "cubewright/algebra.hpp"

namespace cubewright {

// Expression tree over operation symbols and variables. Nodes are shared so
// terms reconstructed from closure parents stay compact even when subterms
// repeat. Variables print 1-based as x1, x2, ...
struct TermNode;
using TermPtr = std::shared_ptr<const TermNode>;

struct TermNode {
    int var = -1;          // >= 0 for a leaf
    std::string op;        // operation name for an interior node
    std::vector<TermPtr> children;
};

class Term {
public:
    Term() = default;
    explicit Term(TermPtr node) : node_(std::move(node)) {}

    static Term variable(int index) {
        auto n = std::make_shared<TermNode>();
        n->var = index;
        return Term(n);
    }

    static Term apply(std::string op, std::vector<Term> args) {
        auto n = std::make_shared<TermNode>();
        n->op = std::move(op);
        n->children.reserve(args.size());
        for (Term& t : args) n->children.push_back(t.node_);
        return Term(n);
    }

    bool valid() const { return node_ != nullptr; }
    const TermPtr& node() const { return node_; }

    bool is_variable() const { return node_ && node_->var >= 0; }
    int variable_index() const { return node_->var; }

    // 1 + max variable index.
    int arity() const {
        int max_var = -1;
        walk([&](const TermNode& n) {
            if (n.var >= 0 && n.var > max_var) max_var = n.var;
        });
        return max_var + 1;
    }

    Elem evaluate(const FiniteAlgebra& alg, std::span<const Elem> assignment) const {
        std::unordered_map<const TermNode*, Elem> memo;
        return eval_node(alg, node_.get(), assignment, memo);
    }

    // Substitutes args[i] for Var(i) throughout.
    Term substitute(const std::vector<Term>& args) const {
        std::unordered_map<const TermNode*, TermPtr> memo;
        return Term(subst_node(node_, args, memo));
    }

    std::string to_string() const {
        std::ostringstream out;
        print_node(out, node_.get());
        return out.str();
    }

private:
    template <typename F>
    void walk(F&& f) const {
        std::unordered_map<const TermNode*, bool> seen;
        walk_node(node_.get(), seen, f);
    }

    template <typename F>
    static void walk_node(const TermNode* n, std::unordered_map<const TermNode*, bool>& seen, F&& f) {
        if (!n || seen.count(n)) return;
        seen[n] = true;
        f(*n);
        for (const TermPtr& c : n->children) walk_node(c.get(), seen, f);
    }

    static Elem eval_node(const FiniteAlgebra& alg, const TermNode* n, std::span<const Elem> assignment,
                          std::unordered_map<const TermNode*, Elem>& memo) {
        if (n->var >= 0) {
            if (static_cast<std::size_t>(n->var) >= assignment.size()) {
                throw inconsistency_error("term evaluation: variable x" + std::to_string(n->var + 1) +
                                          " has no assigned value");
            }
            return assignment[n->var];
        }
        auto it = memo.find(n);
        if (it != memo.end()) return it->second;
        int op_idx = alg.op_index(n->op);
        if (op_idx < 0) throw inconsistency_error("term evaluation: unknown operation " + n->op);
        const Operation& op = alg.operations[op_idx];
        if (op.arity != static_cast<int>(n->children.size())) {
            throw inconsistency_error("term evaluation: operation " + n->op + " applied to " +
                                      std::to_string(n->children.size()) + " arguments, arity is " +
                                      std::to_string(op.arity));
        }
        std::vector<Elem> vals(n->children.size());
        for (std::size_t i = 0; i < n->children.size(); ++i) {
            vals[i] = eval_node(alg, n->children[i].get(), assignment, memo);
        }
        Elem v = alg.apply(op, vals);
        memo[n] = v;
        return v;
    }

    static TermPtr subst_node(const TermPtr& n, const std::vector<Term>& args,
                              std::unordered_map<const TermNode*, TermPtr>& memo) {
        if (n->var >= 0) {
            if (static_cast<std::size_t>(n->var) >= args.size()) {
                throw inconsistency_error("term substitution: no argument for x" + std::to_string(n->var + 1));
            }
            return args[n->var].node();
        }
        auto it = memo.find(n.get());
        if (it != memo.end()) return it->second;
        auto copy = std::make_shared<TermNode>();
        copy->op = n->op;
        copy->children.reserve(n->children.size());
        for (const TermPtr& c : n->children) copy->children.push_back(subst_node(c, args, memo));
        memo[n.get()] = copy;
        return copy;
    }

    static void print_node(std::ostringstream& out, const TermNode* n) {
        if (n->var >= 0) {
            out << 'x' << (n->var + 1);
            return;
        }
        out << '(' << n->op;
        for (const TermPtr& c : n->children) {
            out << ' ';
            print_node(out, c.get());
        }
        out << ')';
    }

    TermPtr node_;
};

// Parses the prefix notation emitted by Term::to_string, e.g.
// "(meet x1 (meet x2 x3))". When an algebra is given, operation names and
// child counts are checked against it.
inline Term parse_term(const std::string& text, const FiniteAlgebra* alg = nullptr) {
    std::size_t pos = 0;
    auto skip_ws = [&] { while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos; };
    auto fail = [&](const std::string& msg) {
        return format_error("term parse at offset " + std::to_string(pos) + ": " + msg);
    };

    std::function<Term()> parse = [&]() -> Term {
        skip_ws();
        if (pos >= text.size()) throw fail("unexpected end of input");
        if (text[pos] == '(') {
            ++pos;
            skip_ws();
            std::size_t start = pos;
            while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
                   !std::isspace(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            }
            std::string opname = text.substr(start, pos - start);
            if (opname.empty()) throw fail("missing operation name");
            std::vector<Term> children;
            while (true) {
                skip_ws();
                if (pos >= text.size()) throw fail("missing ')'");
                if (text[pos] == ')') {
                    ++pos;
                    break;
                }
                children.push_back(parse());
            }
            if (alg) {
                int idx = alg->op_index(opname);
                if (idx < 0) throw fail("unknown operation " + opname);
                if (alg->operations[idx].arity != static_cast<int>(children.size())) {
                    throw fail("operation " + opname + " expects " +
                               std::to_string(alg->operations[idx].arity) + " arguments");
                }
            }
            return Term::apply(std::move(opname), std::move(children));
        }
        if (text[pos] == 'x') {
            ++pos;
            std::size_t start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (start == pos) throw fail("expected variable index after 'x'");
            int idx = std::stoi(text.substr(start, pos - start));
            if (idx < 1) throw fail("variable indices are 1-based");
            return Term::variable(idx - 1);
        }
        throw fail(std::string("unexpected character '") + text[pos] + "'");
    };

    Term t = parse();
    skip_ws();
    if (pos != text.size()) throw fail("trailing input");
    return t;
}

} // namespace cubewright
