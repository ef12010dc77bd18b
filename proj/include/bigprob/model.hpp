#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigprob/reactive.hpp"

namespace bigprob {

struct SourcePos {
    int line = 0;
    int column = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Arithmetic over constants and parameters.
struct Expr {
    enum class Kind { Int, Float, Var, Neg, Add, Sub, Mul, Div };
    Kind kind = Kind::Int;
    std::string text;  ///< literal text or variable name
    ExprPtr lhs;
    ExprPtr rhs;
    SourcePos pos;
};

struct BExpr;
using BExprPtr = std::shared_ptr<const BExpr>;

/// Bigraph expression.
struct BExpr {
    enum class Kind {
        Atom,    ///< ion `Ctrl(args){links}` or reference `name(args)`
        Site,    ///< id
        One,     ///< 1
        Nest,    ///< lhs . rhs
        Merge,   ///< lhs | rhs
        Par,     ///< lhs || rhs
        Close,   ///< /name lhs
        Repeat,  ///< par(count, lhs)
    };
    Kind kind = Kind::One;
    std::string name;
    std::vector<ExprPtr> args;
    std::vector<std::string> links;
    BExprPtr lhs;
    BExprPtr rhs;
    ExprPtr count;
    SourcePos pos;
};

/// `v in from:to`, inclusive.
struct Binder {
    std::string var;
    ExprPtr from;
    ExprPtr to;
};

/// `name(args)[reward] for v in a:b, ...` in a rules, preds or action list.
struct RefItem {
    std::string name;
    std::vector<ExprPtr> args;
    ExprPtr reward;  ///< may be null
    std::vector<Binder> binders;
    SourcePos pos;
};

struct ActionItem {
    std::string name;
    ExprPtr reward;  ///< may be null
    std::vector<RefItem> rules;
    SourcePos pos;
};

struct Decl {
    enum class Kind { Ctrl, Int, Float, Big, React };
    Kind kind = Kind::Ctrl;
    std::string name;
    bool fun = false;
    bool atomic = false;
    std::vector<std::string> params;
    ExprPtr value;   ///< constant value or control arity
    BExprPtr body;   ///< big body or redex
    BExprPtr reactum;
    ExprPtr weight;  ///< null for `-->`
    SourcePos pos;
};

struct SystemBlock {
    SystemKind kind = SystemKind::Pbrs;
    BExprPtr init;
    std::optional<std::vector<RefItem>> rules;
    std::vector<RefItem> preds;
    std::optional<std::vector<ActionItem>> actions;
    SourcePos pos;
};

struct ModelAst {
    std::vector<Decl> decls;
    std::optional<SystemBlock> system;
};

// Structural equality ignoring source positions.
bool operator==(const Expr& a, const Expr& b);
bool operator==(const BExpr& a, const BExpr& b);
bool operator==(const Binder& a, const Binder& b);
bool operator==(const RefItem& a, const RefItem& b);
bool operator==(const ActionItem& a, const ActionItem& b);
bool operator==(const Decl& a, const Decl& b);
bool operator==(const SystemBlock& a, const SystemBlock& b);
bool operator==(const ModelAst& a, const ModelAst& b);

/// Parses model source text. Throws ParseError with the offending position,
/// or ModelError for an empty model.
ModelAst parse_model(std::string_view source);

/// Canonical source text; parse_model(print_model(m)) == m.
std::string print_model(const ModelAst& model);
std::string print_expr(const Expr& e);
std::string print_bexpr(const BExpr& e);

struct ElaborateOptions {
    /// Constant overrides, NAME -> literal text.
    std::map<std::string, std::string> defines;
};

/// Resolves names, folds constants, instantiates parameterised bigraphs and
/// rules, and checks every rule. Throws ModelError (or SolidityError for a
/// non-solid redex or predicate).
SystemSpec elaborate(const ModelAst& model, const ElaborateOptions& options = {});

/// parse_model + elaborate on a file.
SystemSpec load_model(const std::string& path, const ElaborateOptions& options = {});

}  // namespace bigprob
