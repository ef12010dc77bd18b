#include "bigprob/model.hpp"

namespace bigprob {

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& xs, const std::string& sep, F f) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += f(xs[i]);
    }
    return out;
}

std::string args(const std::vector<ExprPtr>& xs) {
    if (xs.empty()) return "";
    return "(" + join(xs, ", ", [](const ExprPtr& e) { return print_expr(*e); }) + ")";
}

std::string params(const std::vector<std::string>& ps) {
    if (ps.empty()) return "";
    return "(" + join(ps, ", ", [](const std::string& s) { return s; }) + ")";
}

std::string ref_item(const RefItem& r) {
    std::string out = r.name + args(r.args);
    if (r.reward) out += "[" + print_expr(*r.reward) + "]";
    if (!r.binders.empty())
        out += " for " + join(r.binders, ", ", [](const Binder& b) {
                   return b.var + " in " + print_expr(*b.from) + ":" + print_expr(*b.to);
               });
    return out;
}

std::string kind_word(SystemKind k) { return to_string(k); }

}  // namespace

std::string print_expr(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Int:
        case Expr::Kind::Float:
        case Expr::Kind::Var: return e.text;
        case Expr::Kind::Neg: return "(-" + print_expr(*e.lhs) + ")";
        case Expr::Kind::Add: return "(" + print_expr(*e.lhs) + " + " + print_expr(*e.rhs) + ")";
        case Expr::Kind::Sub: return "(" + print_expr(*e.lhs) + " - " + print_expr(*e.rhs) + ")";
        case Expr::Kind::Mul: return "(" + print_expr(*e.lhs) + " * " + print_expr(*e.rhs) + ")";
        case Expr::Kind::Div: return "(" + print_expr(*e.lhs) + " / " + print_expr(*e.rhs) + ")";
    }
    return "";
}

std::string print_bexpr(const BExpr& e) {
    switch (e.kind) {
        case BExpr::Kind::Atom: {
            std::string out = e.name + args(e.args);
            if (!e.links.empty()) out += "{" + join(e.links, ", ", [](const std::string& s) { return s; }) + "}";
            return out;
        }
        case BExpr::Kind::Site: return "id";
        case BExpr::Kind::One: return "1";
        case BExpr::Kind::Nest: return "(" + print_bexpr(*e.lhs) + "." + print_bexpr(*e.rhs) + ")";
        case BExpr::Kind::Merge: return "(" + print_bexpr(*e.lhs) + " | " + print_bexpr(*e.rhs) + ")";
        case BExpr::Kind::Par: return "(" + print_bexpr(*e.lhs) + " || " + print_bexpr(*e.rhs) + ")";
        case BExpr::Kind::Close: return "(/" + e.name + " " + print_bexpr(*e.lhs) + ")";
        case BExpr::Kind::Repeat: return "par(" + print_expr(*e.count) + ", " + print_bexpr(*e.lhs) + ")";
    }
    return "";
}

std::string print_model(const ModelAst& model) {
    std::string out;
    for (const auto& d : model.decls) {
        switch (d.kind) {
            case Decl::Kind::Ctrl:
                out += std::string(d.atomic ? "atomic " : "") + (d.fun ? "fun " : "") + "ctrl " + d.name +
                       params(d.params) + " = " + print_expr(*d.value) + ";\n";
                break;
            case Decl::Kind::Int:
            case Decl::Kind::Float:
                out += std::string(d.kind == Decl::Kind::Int ? "int " : "float ") + d.name + " = " +
                       print_expr(*d.value) + ";\n";
                break;
            case Decl::Kind::Big:
                out += std::string(d.fun ? "fun " : "") + "big " + d.name + params(d.params) + " = " +
                       print_bexpr(*d.body) + ";\n";
                break;
            case Decl::Kind::React:
                out += std::string(d.fun ? "fun " : "") + "react " + d.name + params(d.params) + " =\n    " +
                       print_bexpr(*d.body) + "\n    " +
                       (d.weight ? "-[" + print_expr(*d.weight) + "]->" : std::string("-->")) + "\n    " +
                       print_bexpr(*d.reactum) + ";\n";
                break;
        }
    }
    if (const auto& s = model.system) {
        out += "begin " + kind_word(s->kind) + "\n";
        if (s->init) out += "  init = " + print_bexpr(*s->init) + ";\n";
        if (s->rules) out += "  rules = [ " + join(*s->rules, ", ", ref_item) + " ];\n";
        if (!s->preds.empty()) out += "  preds = [ " + join(s->preds, ", ", ref_item) + " ];\n";
        if (s->actions)
            out += "  actions = [ " + join(*s->actions, ", ", [](const ActionItem& a) {
                       std::string item = a.name;
                       if (a.reward) item += "[" + print_expr(*a.reward) + "]";
                       return item + " = { " + join(a.rules, ", ", ref_item) + " }";
                   }) + " ];\n";
        out += "end\n";
    }
    return out;
}

}  // namespace bigprob
