#include <cctype>
#include <set>

#include "bigprob/error.hpp"
#include "bigprob/model.hpp"

namespace bigprob {

namespace {

enum class Tok {
    Ident, Int, Float, Punct, ArrowOpen /* -[ */, ArrowClose /* ]-> */, Arrow /* --> */, Or /* || */, End
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        SourcePos pos{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            bool real = false;
            if (j + 1 < src.size() && src[j] == '.' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                real = true;
                ++j;
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            }
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    real = true;
                    j = k;
                    while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
                }
            }
            out.push_back({real ? Tok::Float : Tok::Int, std::string(src.substr(i, j - i)), pos});
            advance(j - i);
            continue;
        }
        if (starts("-->")) {
            out.push_back({Tok::Arrow, "-->", pos});
            advance(3);
            continue;
        }
        if (starts("-[")) {
            out.push_back({Tok::ArrowOpen, "-[", pos});
            advance(2);
            continue;
        }
        if (starts("]->")) {
            out.push_back({Tok::ArrowClose, "]->", pos});
            advance(3);
            continue;
        }
        if (starts("||")) {
            out.push_back({Tok::Or, "||", pos});
            advance(2);
            continue;
        }
        static const std::string punct = "=;,(){}[].|/+-*:";
        if (punct.find(c) != std::string::npos) {
            out.push_back({Tok::Punct, std::string(1, c), pos});
            advance(1);
            continue;
        }
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::End, "", {line, col}});
    return out;
}

const std::set<std::string> kKeywords = {"ctrl", "atomic", "fun", "int", "float", "big", "react", "begin",
                                         "end", "init", "rules", "preds", "actions", "for", "in", "par", "id"};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    ModelAst model() {
        ModelAst m;
        while (!at_end() && !is_word("begin")) m.decls.push_back(decl());
        if (is_word("begin")) m.system = system();
        if (!at_end()) fail("expected end of input");
        if (m.decls.empty() && !m.system) throw ModelError("empty model");
        return m;
    }

private:
    const Token& peek(std::size_t k = 0) const { return t_[std::min(p_ + k, t_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }
    bool is_word(const char* w, std::size_t k = 0) const { return peek(k).kind == Tok::Ident && peek(k).text == w; }
    bool is_punct(const char* s, std::size_t k = 0) const { return peek(k).kind == Tok::Punct && peek(k).text == s; }

    [[noreturn]] void fail(const std::string& what) const {
        const Token& tok = peek();
        std::string found = tok.kind == Tok::End ? "end of input" : "'" + tok.text + "'";
        throw ParseError(tok.pos.line, tok.pos.column, what + ", found " + found);
    }

    Token take() { return t_[p_++]; }

    void expect_punct(const char* s) {
        if (!is_punct(s)) fail(std::string("expected '") + s + "'");
        ++p_;
    }
    void expect_word(const char* w) {
        if (!is_word(w)) fail(std::string("expected '") + w + "'");
        ++p_;
    }
    bool accept_punct(const char* s) {
        if (!is_punct(s)) return false;
        ++p_;
        return true;
    }
    std::string ident(const char* what = "identifier") {
        if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) fail(std::string("expected ") + what);
        return take().text;
    }
    void end_decl() { accept_punct(";"); }

    std::vector<std::string> param_list() {
        std::vector<std::string> ps;
        expect_punct("(");
        ps.push_back(ident("parameter name"));
        while (accept_punct(",")) ps.push_back(ident("parameter name"));
        expect_punct(")");
        return ps;
    }

    Decl decl() {
        Decl d;
        d.pos = peek().pos;
        if (is_word("atomic")) {
            ++p_;
            d.atomic = true;
            if (is_word("fun")) {
                ++p_;
                d.fun = true;
            }
            expect_word("ctrl");
            return ctrl_rest(std::move(d));
        }
        if (is_word("fun")) {
            ++p_;
            d.fun = true;
            if (is_word("ctrl")) {
                ++p_;
                return ctrl_rest(std::move(d));
            }
            if (is_word("big")) {
                ++p_;
                return big_rest(std::move(d));
            }
            if (is_word("react")) {
                ++p_;
                return react_rest(std::move(d));
            }
            fail("expected 'ctrl', 'big' or 'react' after 'fun'");
        }
        if (is_word("ctrl")) {
            ++p_;
            return ctrl_rest(std::move(d));
        }
        if (is_word("int") || is_word("float")) {
            d.kind = take().text == "int" ? Decl::Kind::Int : Decl::Kind::Float;
            d.name = ident("constant name");
            expect_punct("=");
            d.value = expr();
            end_decl();
            return d;
        }
        if (is_word("big")) {
            ++p_;
            return big_rest(std::move(d));
        }
        if (is_word("react")) {
            ++p_;
            return react_rest(std::move(d));
        }
        fail("expected a declaration");
    }

    Decl ctrl_rest(Decl d) {
        d.kind = Decl::Kind::Ctrl;
        d.name = ident("control name");
        if (d.fun) d.params = param_list();
        expect_punct("=");
        d.value = expr();
        end_decl();
        return d;
    }

    Decl big_rest(Decl d) {
        d.kind = Decl::Kind::Big;
        d.name = ident("bigraph name");
        if (d.fun) d.params = param_list();
        expect_punct("=");
        d.body = bexp();
        end_decl();
        return d;
    }

    Decl react_rest(Decl d) {
        d.kind = Decl::Kind::React;
        d.name = ident("rule name");
        if (d.fun) d.params = param_list();
        expect_punct("=");
        d.body = bexp();
        if (peek().kind == Tok::Arrow) {
            ++p_;
        } else if (peek().kind == Tok::ArrowOpen) {
            ++p_;
            d.weight = expr();
            if (peek().kind != Tok::ArrowClose) fail("expected ']->'");
            ++p_;
        } else {
            fail("expected '-[' or '-->'");
        }
        d.reactum = bexp();
        end_decl();
        return d;
    }

    // Arithmetic.

    ExprPtr expr() {
        ExprPtr lhs = term();
        while (is_punct("+") || is_punct("-")) {
            Token op = take();
            auto e = std::make_shared<Expr>();
            e->kind = op.text == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
            e->pos = op.pos;
            e->lhs = lhs;
            e->rhs = term();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr term() {
        ExprPtr lhs = factor();
        while (is_punct("*") || is_punct("/")) {
            Token op = take();
            auto e = std::make_shared<Expr>();
            e->kind = op.text == "*" ? Expr::Kind::Mul : Expr::Kind::Div;
            e->pos = op.pos;
            e->lhs = lhs;
            e->rhs = factor();
            lhs = e;
        }
        return lhs;
    }

    ExprPtr factor() {
        auto e = std::make_shared<Expr>();
        e->pos = peek().pos;
        if (accept_punct("-")) {
            e->kind = Expr::Kind::Neg;
            e->lhs = factor();
            return e;
        }
        if (accept_punct("(")) {
            ExprPtr inner = expr();
            expect_punct(")");
            return inner;
        }
        if (peek().kind == Tok::Int || peek().kind == Tok::Float) {
            e->kind = peek().kind == Tok::Int ? Expr::Kind::Int : Expr::Kind::Float;
            e->text = take().text;
            return e;
        }
        if (peek().kind == Tok::Ident && !kKeywords.count(peek().text)) {
            e->kind = Expr::Kind::Var;
            e->text = take().text;
            return e;
        }
        fail("expected an expression");
    }

    std::vector<ExprPtr> arg_list() {
        std::vector<ExprPtr> args;
        expect_punct("(");
        args.push_back(expr());
        while (accept_punct(",")) args.push_back(expr());
        expect_punct(")");
        return args;
    }

    // Bigraph expressions, loosest first: || then | then /x then . then atoms.

    BExprPtr bexp() {
        BExprPtr lhs = bmerge();
        while (peek().kind == Tok::Or) {
            auto e = std::make_shared<BExpr>();
            e->pos = take().pos;
            e->kind = BExpr::Kind::Par;
            e->lhs = lhs;
            e->rhs = bmerge();
            lhs = e;
        }
        return lhs;
    }

    BExprPtr bmerge() {
        BExprPtr lhs = bclose();
        while (is_punct("|")) {
            auto e = std::make_shared<BExpr>();
            e->pos = take().pos;
            e->kind = BExpr::Kind::Merge;
            e->lhs = lhs;
            e->rhs = bclose();
            lhs = e;
        }
        return lhs;
    }

    BExprPtr bclose() {
        if (is_punct("/")) {
            auto e = std::make_shared<BExpr>();
            e->pos = take().pos;
            e->kind = BExpr::Kind::Close;
            e->name = ident("name to close");
            e->lhs = bclose();
            return e;
        }
        return bnest();
    }

    BExprPtr bnest() {
        BExprPtr lhs = batom();
        if (is_punct(".")) {
            auto e = std::make_shared<BExpr>();
            e->pos = take().pos;
            e->kind = BExpr::Kind::Nest;
            e->lhs = lhs;
            e->rhs = bnest();
            return e;
        }
        return lhs;
    }

    BExprPtr batom() {
        auto e = std::make_shared<BExpr>();
        e->pos = peek().pos;
        if (accept_punct("(")) {
            BExprPtr inner = bexp();
            expect_punct(")");
            return inner;
        }
        if (peek().kind == Tok::Int && peek().text == "1") {
            ++p_;
            e->kind = BExpr::Kind::One;
            return e;
        }
        if (is_word("id")) {
            ++p_;
            e->kind = BExpr::Kind::Site;
            return e;
        }
        if (is_word("par")) {
            ++p_;
            e->kind = BExpr::Kind::Repeat;
            expect_punct("(");
            e->count = expr();
            expect_punct(",");
            e->lhs = bexp();
            expect_punct(")");
            return e;
        }
        e->kind = BExpr::Kind::Atom;
        e->name = ident("control or bigraph name");
        if (is_punct("(")) e->args = arg_list();
        if (accept_punct("{")) {
            if (!is_punct("}")) {
                e->links.push_back(ident("link name"));
                while (accept_punct(",")) e->links.push_back(ident("link name"));
            }
            expect_punct("}");
        }
        return e;
    }

    // System block.

    SystemBlock system() {
        SystemBlock s;
        s.pos = peek().pos;
        expect_word("begin");
        std::string kind = peek().kind == Tok::Ident ? peek().text : "";
        if (kind == "brs") s.kind = SystemKind::Brs;
        else if (kind == "pbrs") s.kind = SystemKind::Pbrs;
        else if (kind == "sbrs") s.kind = SystemKind::Sbrs;
        else if (kind == "abrs") s.kind = SystemKind::Abrs;
        else fail("expected brs, pbrs, sbrs or abrs");
        ++p_;
        bool seen_preds = false;
        while (!is_word("end")) {
            if (at_end()) fail("expected 'end'");
            SourcePos at = peek().pos;
            if (is_word("init")) {
                ++p_;
                if (s.init) throw ParseError(at.line, at.column, "duplicate init");
                expect_punct("=");
                s.init = bexp();
            } else if (is_word("rules")) {
                ++p_;
                if (s.rules) throw ParseError(at.line, at.column, "duplicate rules list");
                expect_punct("=");
                s.rules = list<RefItem>([this] { return ref_item(false); });
            } else if (is_word("preds")) {
                ++p_;
                if (seen_preds) throw ParseError(at.line, at.column, "duplicate preds list");
                seen_preds = true;
                expect_punct("=");
                s.preds = list<RefItem>([this] { return ref_item(true); });
            } else if (is_word("actions")) {
                ++p_;
                if (s.actions) throw ParseError(at.line, at.column, "duplicate actions list");
                expect_punct("=");
                s.actions = list<ActionItem>([this] { return action_item(); });
            } else {
                fail("expected init, rules, preds, actions or end");
            }
            accept_punct(";");
        }
        expect_word("end");
        return s;
    }

    template <typename T, typename F>
    std::vector<T> list(F item, const char* open = "[", const char* close = "]") {
        std::vector<T> out;
        expect_punct(open);
        while (!is_punct(close)) {
            out.push_back(item());
            if (!accept_punct(",")) break;
        }
        expect_punct(close);
        return out;
    }

    RefItem ref_item(bool with_reward) {
        RefItem r;
        r.pos = peek().pos;
        r.name = ident("rule or bigraph name");
        if (is_punct("(")) r.args = arg_list();
        if (with_reward && accept_punct("[")) {
            r.reward = expr();
            expect_punct("]");
        }
        if (is_word("for")) {
            ++p_;
            r.binders.push_back(binder());
            // `, v in` continues the binders; anything else is the next item.
            while (is_punct(",") && peek(1).kind == Tok::Ident && is_word("in", 2)) {
                ++p_;
                r.binders.push_back(binder());
            }
        }
        return r;
    }

    Binder binder() {
        Binder b;
        b.var = ident("variable");
        expect_word("in");
        b.from = expr();
        expect_punct(":");
        b.to = expr();
        return b;
    }

    ActionItem action_item() {
        ActionItem a;
        a.pos = peek().pos;
        a.name = ident("action name");
        if (accept_punct("[")) {
            a.reward = expr();
            expect_punct("]");
        }
        expect_punct("=");
        a.rules = list<RefItem>([this] { return ref_item(false); }, "{", "}");
        return a;
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
};

}  // namespace

ModelAst parse_model(std::string_view source) { return Parser(lex(source)).model(); }

// ---------------------------------------------------------------------------
// Equality

namespace {

template <typename T>
bool same_ptr(const std::shared_ptr<const T>& a, const std::shared_ptr<const T>& b) {
    if (!a || !b) return !a && !b;
    return *a == *b;
}

template <typename T>
bool same_ptrs(const std::vector<std::shared_ptr<const T>>& a, const std::vector<std::shared_ptr<const T>>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!same_ptr(a[i], b[i])) return false;
    return true;
}

}  // namespace

bool operator==(const Expr& a, const Expr& b) {
    return a.kind == b.kind && a.text == b.text && same_ptr(a.lhs, b.lhs) && same_ptr(a.rhs, b.rhs);
}

bool operator==(const BExpr& a, const BExpr& b) {
    return a.kind == b.kind && a.name == b.name && same_ptrs(a.args, b.args) && a.links == b.links &&
           same_ptr(a.lhs, b.lhs) && same_ptr(a.rhs, b.rhs) && same_ptr(a.count, b.count);
}

bool operator==(const Binder& a, const Binder& b) {
    return a.var == b.var && same_ptr(a.from, b.from) && same_ptr(a.to, b.to);
}

bool operator==(const RefItem& a, const RefItem& b) {
    return a.name == b.name && same_ptrs(a.args, b.args) && same_ptr(a.reward, b.reward) && a.binders == b.binders;
}

bool operator==(const ActionItem& a, const ActionItem& b) {
    return a.name == b.name && same_ptr(a.reward, b.reward) && a.rules == b.rules;
}

bool operator==(const Decl& a, const Decl& b) {
    return a.kind == b.kind && a.name == b.name && a.fun == b.fun && a.atomic == b.atomic && a.params == b.params &&
           same_ptr(a.value, b.value) && same_ptr(a.body, b.body) && same_ptr(a.reactum, b.reactum) &&
           same_ptr(a.weight, b.weight);
}

bool operator==(const SystemBlock& a, const SystemBlock& b) {
    return a.kind == b.kind && same_ptr(a.init, b.init) && a.rules == b.rules && a.preds == b.preds &&
           a.actions == b.actions;
}

bool operator==(const ModelAst& a, const ModelAst& b) { return a.decls == b.decls && a.system == b.system; }

}  // namespace bigprob
