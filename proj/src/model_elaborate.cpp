#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "bigprob/canonical.hpp"
#include "bigprob/error.hpp"
#include "bigprob/matching.hpp"
#include "bigprob/model.hpp"

namespace bigprob {

namespace {

struct Value {
    bool integer = true;
    std::int64_t i = 0;
    Scalar r;

    static Value of_int(std::int64_t v) { return Value{true, v, Scalar(v)}; }
    static Value of_real(Scalar v) { return Value{false, 0, v}; }

    Param param() const { return integer ? Param(i) : Param(r.value()); }
    std::string str() const { return integer ? std::to_string(i) : param_to_string(Param(r.value())); }
};

std::string where(SourcePos p) { return std::to_string(p.line) + ":" + std::to_string(p.column) + ": "; }

[[noreturn]] void error_at(SourcePos p, const std::string& msg) { throw ModelError(where(p) + msg); }

Value parse_literal(const std::string& text, bool as_int, SourcePos pos) {
    if (as_int) {
        std::int64_t v = 0;
        std::istringstream is(text);
        if (!(is >> v) || !is.eof()) error_at(pos, "bad integer literal " + text);
        return Value::of_int(v);
    }
    try {
        return Value::of_real(Scalar::parse(text));
    } catch (const std::invalid_argument&) {
        error_at(pos, "bad number " + text);
    }
}

using Scope = std::map<std::string, Value>;

class Elaborator {
public:
    Elaborator(const ModelAst& ast, const ElaborateOptions& options) : ast_(ast), options_(options) {}

    SystemSpec run() {
        declare();
        for (const auto& [name, text] : options_.defines)
            if (!overridden_.count(name)) throw ModelError("--define names unknown constant " + name);
        if (!ast_.system) throw ModelError("model has no system block (begin ... end)");
        return system(*ast_.system);
    }

private:
    // ---- declarations

    void declare() {
        for (const auto& d : ast_.decls) {
            if (names_.count(d.name)) error_at(d.pos, "duplicate declaration of " + d.name);
            switch (d.kind) {
                case Decl::Kind::Int:
                case Decl::Kind::Float: {
                    Value v;
                    auto def = options_.defines.find(d.name);
                    if (def != options_.defines.end()) {
                        bool is_int = def->second.find_first_of(".eE") == std::string::npos;
                        v = parse_literal(def->second, is_int, d.pos);
                        overridden_.insert(d.name);
                    } else {
                        v = eval(*d.value, {});
                    }
                    if (d.kind == Decl::Kind::Int && !v.integer)
                        error_at(d.pos, "int constant " + d.name + " has a non-integer value");
                    if (d.kind == Decl::Kind::Float) v = Value::of_real(v.r);
                    constants_[d.name] = v;
                    break;
                }
                case Decl::Kind::Ctrl: {
                    Value a = eval(*d.value, {});
                    if (!a.integer || a.i < 0) error_at(d.pos, "arity of " + d.name + " must be a nonnegative integer");
                    controls_[d.name] = &d;
                    arities_[d.name] = static_cast<int>(a.i);
                    break;
                }
                case Decl::Kind::Big: bigs_[d.name] = &d; break;
                case Decl::Kind::React:
                    if (!d.weight && ast_.system && ast_.system->kind != SystemKind::Brs)
                        error_at(d.pos, "rule " + d.name + " uses '-->', which is only allowed in brs models");
                    reacts_[d.name] = &d;
                    break;
            }
            names_.insert(d.name);
        }
    }

    // ---- arithmetic

    Value eval(const Expr& e, const Scope& scope) const {
        switch (e.kind) {
            case Expr::Kind::Int: return parse_literal(e.text, true, e.pos);
            case Expr::Kind::Float: return parse_literal(e.text, false, e.pos);
            case Expr::Kind::Var: {
                if (auto it = scope.find(e.text); it != scope.end()) return it->second;
                if (auto it = constants_.find(e.text); it != constants_.end()) return it->second;
                error_at(e.pos, "unknown constant " + e.text);
            }
            case Expr::Kind::Neg: {
                Value v = eval(*e.lhs, scope);
                return v.integer ? Value::of_int(-v.i) : Value::of_real(-v.r);
            }
            default: break;
        }
        Value a = eval(*e.lhs, scope), b = eval(*e.rhs, scope);
        if (a.integer && b.integer && e.kind != Expr::Kind::Div) {
            std::int64_t out = 0;
            bool overflow = false;
            switch (e.kind) {
                case Expr::Kind::Add: overflow = __builtin_add_overflow(a.i, b.i, &out); break;
                case Expr::Kind::Sub: overflow = __builtin_sub_overflow(a.i, b.i, &out); break;
                case Expr::Kind::Mul: overflow = __builtin_mul_overflow(a.i, b.i, &out); break;
                default: break;
            }
            if (overflow) error_at(e.pos, "integer overflow");
            return Value::of_int(out);
        }
        if (e.kind == Expr::Kind::Div && b.r.is_zero()) error_at(e.pos, "division by zero");
        switch (e.kind) {
            case Expr::Kind::Add: return Value::of_real(a.r + b.r);
            case Expr::Kind::Sub: return Value::of_real(a.r - b.r);
            case Expr::Kind::Mul: return Value::of_real(a.r * b.r);
            default: return Value::of_real(a.r / b.r);
        }
    }

    // ---- bigraphs

    Bigraph big(const BExpr& e, const Scope& scope, int depth = 0) const {
        if (depth > 256) error_at(e.pos, "bigraph definitions nest too deeply");
        try {
            switch (e.kind) {
                case BExpr::Kind::Site: return site_bigraph();
                case BExpr::Kind::One: return one();
                case BExpr::Kind::Atom: return atom(e, scope, depth);
                case BExpr::Kind::Nest: {
                    Bigraph outer = big(*e.lhs, scope, depth + 1);
                    if (e.lhs->kind == BExpr::Kind::Atom && controls_.count(e.lhs->name) &&
                        controls_.at(e.lhs->name)->atomic)
                        error_at(e.pos, "atomic control " + e.lhs->name + " cannot have children");
                    Bigraph inner = big(*e.rhs, scope, depth + 1);
                    if (outer.site_count() != inner.region_count())
                        error_at(e.pos, "nesting needs " + std::to_string(outer.site_count()) +
                                            " region(s) inside, got " + std::to_string(inner.region_count()));
                    return nest(outer, inner);
                }
                case BExpr::Kind::Merge: {
                    Bigraph l = big(*e.lhs, scope, depth + 1), r = big(*e.rhs, scope, depth + 1);
                    if (l.region_count() != 1 || r.region_count() != 1)
                        error_at(e.pos, "'|' needs single-region operands; use '||' for several regions");
                    return merge_parallel(l, r);
                }
                case BExpr::Kind::Par: return parallel(big(*e.lhs, scope, depth + 1), big(*e.rhs, scope, depth + 1));
                case BExpr::Kind::Close: {
                    Bigraph b = big(*e.lhs, scope, depth + 1);
                    if (!b.outer_link(e.name)) error_at(e.pos, "cannot close " + e.name + ": not an outer name");
                    return close_name(b, e.name);
                }
                case BExpr::Kind::Repeat: {
                    Value n = eval(*e.count, scope);
                    if (!n.integer || n.i < 0) error_at(e.pos, "par count must be a nonnegative integer");
                    if (n.i > 100000) error_at(e.pos, "par count too large");
                    Bigraph b = big(*e.lhs, scope, depth + 1);
                    if (b.region_count() != 1) error_at(e.pos, "par needs a single-region bigraph");
                    return merge_power(static_cast<int>(n.i), b);
                }
            }
        } catch (const ModelError&) {
            throw;
        } catch (const SolidityError&) {
            throw;
        } catch (const Error& err) {
            error_at(e.pos, err.what());
        }
        return one();
    }

    Bigraph atom(const BExpr& e, const Scope& scope, int depth) const {
        if (auto c = controls_.find(e.name); c != controls_.end()) {
            const Decl& d = *c->second;
            if (e.args.size() != d.params.size())
                error_at(e.pos, "control " + e.name + " takes " + std::to_string(d.params.size()) + " parameter(s), got " +
                                    std::to_string(e.args.size()));
            std::vector<Param> ps;
            for (const auto& a : e.args) ps.push_back(eval(*a, scope).param());
            int arity = arities_.at(e.name);
            if (static_cast<int>(e.links.size()) != arity)
                error_at(e.pos, "control " + e.name + " has arity " + std::to_string(arity) + " but " +
                                    std::to_string(e.links.size()) + " link(s) were given");
            return ion(make_control(e.name, arity, d.atomic, std::move(ps)), e.links);
        }
        if (auto b = bigs_.find(e.name); b != bigs_.end()) {
            const Decl& d = *b->second;
            if (!e.links.empty()) error_at(e.pos, "bigraph " + e.name + " cannot take links");
            if (e.args.size() != d.params.size())
                error_at(e.pos, "bigraph " + e.name + " takes " + std::to_string(d.params.size()) +
                                    " argument(s), got " + std::to_string(e.args.size()));
            if (&d == current_big_) error_at(e.pos, "bigraph " + e.name + " refers to itself");
            Scope inner;
            for (std::size_t i = 0; i < d.params.size(); ++i) inner[d.params[i]] = eval(*e.args[i], scope);
            return big(*d.body, inner, depth + 1);
        }
        error_at(e.pos, "unknown control or bigraph " + e.name);
    }

    // ---- system block

    struct Instance {
        std::string family;
        std::vector<Value> args;
        std::string name;
    };

    static std::string instance_name(const std::string& family, const std::vector<Value>& args) {
        if (args.empty()) return family;
        std::string out = family + "(";
        for (std::size_t i = 0; i < args.size(); ++i) out += (i ? "," : "") + args[i].str();
        return out + ")";
    }

    // Calls f for every binding of the item's comprehension.
    void expand(const RefItem& item, const std::function<void(const Scope&)>& f) const {
        Scope scope;
        std::function<void(std::size_t)> rec = [&](std::size_t k) {
            if (k == item.binders.size()) {
                f(scope);
                return;
            }
            const Binder& b = item.binders[k];
            Value lo = eval(*b.from, scope), hi = eval(*b.to, scope);
            if (!lo.integer || !hi.integer) error_at(item.pos, "range bounds of " + b.var + " must be integers");
            if (hi.i - lo.i > 1000000) error_at(item.pos, "range of " + b.var + " is too large");
            for (std::int64_t v = lo.i; v <= hi.i; ++v) {
                scope[b.var] = Value::of_int(v);
                rec(k + 1);
            }
            scope.erase(b.var);
        };
        rec(0);
    }

    WeightedRule instantiate_rule(const std::string& family, const std::vector<Value>& args, SourcePos pos,
                                  SystemKind kind) const {
        auto it = reacts_.find(family);
        if (it == reacts_.end()) error_at(pos, "unknown rule " + family);
        const Decl& d = *it->second;
        if (args.size() != d.params.size())
            error_at(pos, "rule " + family + " takes " + std::to_string(d.params.size()) + " argument(s), got " +
                              std::to_string(args.size()));
        Scope scope;
        for (std::size_t i = 0; i < args.size(); ++i) scope[d.params[i]] = args[i];
        WeightedRule r;
        r.name = instance_name(family, args);
        r.redex = big(*d.body, scope).lean();
        r.reactum = big(*d.reactum, scope).lean();
        if (d.weight) {
            r.weight = eval(*d.weight, scope).r;
        } else if (kind != SystemKind::Brs) {
            error_at(d.pos, "rule " + family + " has no weight");
        }
        double w = r.weight.value();
        if (!std::isfinite(w) || w < 0 || (r.weight.exact() && r.weight.exact()->num() < 0))
            error_at(d.pos, "rule " + r.name + " has a negative or non-finite " +
                                (kind == SystemKind::Sbrs ? "rate" : "weight"));
        if (auto why = r.redex.solidity_violation())
            throw SolidityError(where(d.pos) + "rule " + r.name + ": redex is not solid: " + *why);
        try {
            check_rule(r.redex, r.reactum, r.name);
        } catch (const SolidityError&) {
            throw;
        } catch (const Error& err) {
            error_at(d.pos, err.what());
        }
        return r;
    }

    std::vector<Value> eval_args(const std::vector<ExprPtr>& args, const Scope& scope) const {
        std::vector<Value> out;
        for (const auto& a : args) out.push_back(eval(*a, scope));
        return out;
    }

    Scalar reward(const ExprPtr& e, const Scope& scope, SourcePos pos) const {
        if (!e) return Scalar(0);
        Scalar r = eval(*e, scope).r;
        if (!std::isfinite(r.value()) || r.value() < 0) error_at(pos, "rewards must be nonnegative and finite");
        return r;
    }

    SystemSpec system(const SystemBlock& s) {
        SystemSpec spec;
        spec.kind = s.kind;
        if (!s.init) error_at(s.pos, "system block has no init");
        spec.initial = big(*s.init, {});
        // Sites left by bare ions in the initial state hold nothing.
        if (spec.initial.site_count() > 0) {
            Bigraph holes = one();
            for (int i = 1; i < spec.initial.site_count(); ++i) holes = tensor(holes, one());
            spec.initial = compose(spec.initial, holes);
        }
        if (!spec.initial.is_ground()) error_at(s.init->pos, "initial bigraph has inner names");
        spec.initial = spec.initial.lean();

        const bool abrs = s.kind == SystemKind::Abrs;
        if (abrs && (!s.actions || s.actions->empty())) error_at(s.pos, "abrs models need a non-empty actions list");
        if (!abrs && s.actions) error_at(s.pos, "actions are only allowed in abrs models");
        if (!s.rules && !abrs) error_at(s.pos, "system block has no rules list");

        std::map<std::string, int> by_name;
        std::vector<Instance> instances;
        auto add_rule = [&](const std::string& family, const std::vector<Value>& args, SourcePos pos) {
            std::string name = instance_name(family, args);
            if (auto it = by_name.find(name); it != by_name.end()) return it->second;
            spec.rules.push_back(instantiate_rule(family, args, pos, s.kind));
            int id = static_cast<int>(spec.rules.size()) - 1;
            by_name.emplace(name, id);
            instances.push_back(Instance{family, args, name});
            return id;
        };

        if (s.rules) {
            for (const auto& item : *s.rules)
                expand(item, [&](const Scope& scope) {
                    std::string name = instance_name(item.name, eval_args(item.args, scope));
                    if (by_name.count(name)) error_at(item.pos, "rule " + name + " is listed twice");
                    add_rule(item.name, eval_args(item.args, scope), item.pos);
                });
        }

        if (abrs) {
            std::set<std::string> action_names;
            std::vector<char> covered(spec.rules.size(), 0);
            for (const auto& a : *s.actions) {
                if (!action_names.insert(a.name).second) error_at(a.pos, "duplicate action " + a.name);
                ActionDecl decl;
                decl.name = a.name;
                decl.reward = reward(a.reward, {}, a.pos);
                std::set<int> members;
                for (const auto& item : a.rules)
                    expand(item, [&](const Scope& scope) {
                        for (int id : resolve_action_ref(item, scope, instances, by_name, s.rules.has_value(), add_rule))
                            members.insert(id);
                    });
                if (members.empty()) error_at(a.pos, "action " + a.name + " contains no rules");
                decl.rules.assign(members.begin(), members.end());
                spec.actions.push_back(std::move(decl));
            }
            covered.assign(spec.rules.size(), 0);
            for (const auto& a : spec.actions)
                for (int r : a.rules) covered[r] = 1;
            for (std::size_t r = 0; r < spec.rules.size(); ++r)
                if (!covered[r]) error_at(s.pos, "rule " + spec.rules[r].name + " belongs to no action");
        }

        std::set<std::string> pred_names;
        for (const auto& item : s.preds)
            expand(item, [&](const Scope& scope) {
                auto args = eval_args(item.args, scope);
                auto it = bigs_.find(item.name);
                if (it == bigs_.end()) error_at(item.pos, "unknown bigraph " + item.name + " in preds");
                const Decl& d = *it->second;
                if (args.size() != d.params.size())
                    error_at(item.pos, "bigraph " + item.name + " takes " + std::to_string(d.params.size()) +
                                           " argument(s)");
                Scope inner;
                for (std::size_t i = 0; i < args.size(); ++i) inner[d.params[i]] = args[i];
                PredicateDecl p;
                p.name = instance_name(item.name, args);
                if (!pred_names.insert(p.name).second) error_at(item.pos, "predicate " + p.name + " is listed twice");
                p.pattern = big(*d.body, inner).lean();
                if (auto why = p.pattern.solidity_violation())
                    throw SolidityError(where(item.pos) + "predicate " + p.name + " is not solid: " + *why);
                if (!p.pattern.inner_links().empty()) error_at(item.pos, "predicate " + p.name + " has inner names");
                p.reward = reward(item.reward, scope, item.pos);
                spec.predicates.push_back(std::move(p));
            });
        return spec;
    }

    // An action member: a concrete rule instance, or a pattern whose bare
    // unknown identifiers range over the instances in the rules list.
    template <typename AddRule>
    std::vector<int> resolve_action_ref(const RefItem& item, const Scope& scope, const std::vector<Instance>& instances,
                                        const std::map<std::string, int>& by_name, bool have_rules,
                                        AddRule& add_rule) const {
        std::vector<std::optional<Value>> fixed;
        std::vector<std::string> wildcard;
        bool any_wild = false;
        for (const auto& a : item.args) {
            if (a->kind == Expr::Kind::Var && !scope.count(a->text) && !constants_.count(a->text)) {
                fixed.emplace_back(std::nullopt);
                wildcard.push_back(a->text);
                any_wild = true;
            } else {
                fixed.emplace_back(eval(*a, scope));
                wildcard.emplace_back();
            }
        }
        if (!any_wild) {
            std::vector<Value> args;
            for (auto& v : fixed) args.push_back(*v);
            std::string name = instance_name(item.name, args);
            if (auto it = by_name.find(name); it != by_name.end()) return {it->second};
            if (have_rules) error_at(item.pos, "rule " + name + " is not in the rules list");
            return {add_rule(item.name, args, item.pos)};
        }
        if (!reacts_.count(item.name)) error_at(item.pos, "unknown rule " + item.name);
        std::vector<int> out;
        for (const auto& inst : instances) {
            if (inst.family != item.name || inst.args.size() != fixed.size()) continue;
            std::map<std::string, std::pair<bool, std::int64_t>> binding;
            bool ok = true;
            for (std::size_t k = 0; k < fixed.size() && ok; ++k) {
                const Value& have = inst.args[k];
                if (fixed[k]) {
                    ok = fixed[k]->integer == have.integer &&
                         (have.integer ? fixed[k]->i == have.i : fixed[k]->r.value() == have.r.value());
                } else {
                    auto [it, fresh] = binding.emplace(wildcard[k], std::make_pair(have.integer, have.i));
                    if (!fresh) ok = it->second == std::make_pair(have.integer, have.i) && have.integer;
                }
            }
            if (ok) out.push_back(by_name.at(inst.name));
        }
        if (out.empty()) error_at(item.pos, "pattern " + item.name + " matches no rule in the rules list");
        return out;
    }

    const ModelAst& ast_;
    const ElaborateOptions& options_;
    std::set<std::string> names_;
    std::set<std::string> overridden_;
    std::map<std::string, Value> constants_;
    std::map<std::string, const Decl*> controls_;
    std::map<std::string, int> arities_;
    std::map<std::string, const Decl*> bigs_;
    std::map<std::string, const Decl*> reacts_;
    const Decl* current_big_ = nullptr;
};

}  // namespace

SystemSpec elaborate(const ModelAst& model, const ElaborateOptions& options) {
    return Elaborator(model, options).run();
}

SystemSpec load_model(const std::string& path, const ElaborateOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return elaborate(parse_model(ss.str()), options);
}

}  // namespace bigprob
