#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "warpspec/errors.hpp"
#include "warpspec/ir.hpp"

namespace warpspec {

namespace lex {

enum class Tok {
    Ident,
    ValueId,  // %name
    Int,
    Real,
    Shape,  // RxC
    Punct,
    DotDot,
    TransposeMark,  // .T
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int64_t ival = 0;
    int64_t ival2 = 0;  // Shape cols
    double rval = 0;
    int line = 0;
    int col = 0;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// One line of input into tokens. '#' starts a comment.
inline std::vector<Token> tokenize_line(const std::string& s, int line) {
    std::vector<Token> out;
    size_t i = 0;
    auto err = [&](const std::string& m) {
        fail(ErrorCode::Parse, "line " + std::to_string(line) + ", col " + std::to_string(i + 1) +
                                   ": " + m);
    };
    while (i < s.size()) {
        char c = s[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.col = static_cast<int>(i) + 1;
        if (c == '%' && i + 1 < s.size() && ident_start(s[i + 1])) {
            size_t j = i + 1;
            while (j < s.size() && ident_char(s[j])) ++j;
            t.kind = Tok::ValueId;
            t.text = s.substr(i + 1, j - i - 1);
            i = j;
            // value ids may carry a transpose suffix
            if (i + 1 < s.size() && s[i] == '.' && s[i + 1] == 'T' &&
                (i + 2 >= s.size() || !ident_char(s[i + 2]))) {
                out.push_back(t);
                t = Token{Tok::TransposeMark, ".T", 0, 0, 0, line, static_cast<int>(i) + 1};
                i += 2;
            }
            out.push_back(t);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            // shape: RxC
            if (j < s.size() && s[j] == 'x' && j + 1 < s.size() &&
                std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                t.kind = Tok::Shape;
                t.ival = std::stoll(s.substr(i, j - i));
                size_t k = j + 1;
                while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                t.ival2 = std::stoll(s.substr(j + 1, k - j - 1));
                t.text = s.substr(i, k - i);
                i = k;
                out.push_back(t);
                continue;
            }
            // real: digits '.' digits (but not '..')
            if (j + 1 < s.size() && s[j] == '.' &&
                std::isdigit(static_cast<unsigned char>(s[j + 1]))) {
                size_t k = j + 1;
                while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                t.kind = Tok::Real;
                t.text = s.substr(i, k - i);
                t.rval = std::stod(t.text);
                i = k;
                out.push_back(t);
                continue;
            }
            t.kind = Tok::Int;
            t.text = s.substr(i, j - i);
            t.ival = std::stoll(t.text);
            i = j;
            out.push_back(t);
            continue;
        }
        if (ident_start(c)) {
            size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            t.kind = Tok::Ident;
            t.text = s.substr(i, j - i);
            i = j;
            out.push_back(t);
            continue;
        }
        if (c == '.' && i + 1 < s.size() && s[i + 1] == '.') {
            t.kind = Tok::DotDot;
            t.text = "..";
            i += 2;
            out.push_back(t);
            continue;
        }
        if (c == '>' && i + 1 < s.size() && s[i + 1] == '=') {
            t.kind = Tok::Punct;
            t.text = ">=";
            i += 2;
            out.push_back(t);
            continue;
        }
        static const std::string punct = "()[]{}<>,=:%+-*/";
        if (punct.find(c) != std::string::npos) {
            t.kind = Tok::Punct;
            t.text = std::string(1, c);
            ++i;
            out.push_back(t);
            continue;
        }
        err(std::string("unexpected character '") + c + "'");
    }
    return out;
}

}  // namespace lex

namespace detail {

// Cursor over one line's tokens.
class Line {
  public:
    Line(std::vector<lex::Token> toks, int line) : toks_(std::move(toks)), line_(line) {}

    bool done() const { return pos_ >= toks_.size(); }
    const lex::Token& peek(size_t ahead = 0) const {
        static lex::Token end{lex::Tok::End, "", 0, 0, 0, 0, 0};
        return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : end;
    }
    lex::Token next() {
        const lex::Token& t = peek();
        ++pos_;
        return t;
    }
    bool accept_punct(const std::string& p) {
        if (peek().kind == lex::Tok::Punct && peek().text == p) {
            ++pos_;
            return true;
        }
        return false;
    }
    bool accept_ident(const std::string& w) {
        if (peek().kind == lex::Tok::Ident && peek().text == w) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect_punct(const std::string& p) {
        if (!accept_punct(p)) err("expected '" + p + "'");
    }
    void expect_ident(const std::string& w) {
        if (!accept_ident(w)) err("expected '" + w + "'");
    }
    std::string expect_value() {
        if (peek().kind != lex::Tok::ValueId) err("expected %value");
        return next().text;
    }
    int64_t expect_int() {
        if (peek().kind != lex::Tok::Int) err("expected integer");
        return next().ival;
    }
    std::string expect_any_ident() {
        if (peek().kind != lex::Tok::Ident) err("expected identifier");
        return next().text;
    }
    void expect_end() {
        if (!done()) err("trailing tokens");
    }
    [[noreturn]] void err(const std::string& m) const {
        const lex::Token& t = peek();
        fail(ErrorCode::Parse, "line " + std::to_string(line_) + ", col " +
                                   std::to_string(t.col ? t.col : 1) + ": " + m);
    }
    int line_no() const { return line_; }

  private:
    std::vector<lex::Token> toks_;
    size_t pos_ = 0;
    int line_ = 0;
};

inline Elem parse_elem_word(Line& ln) {
    std::string w = ln.expect_any_ident();
    if (w == "int") return Elem::Int;
    if (w == "real") return Elem::Real;
    ln.err("expected element kind 'int' or 'real'");
}

inline TileType parse_tile_type(Line& ln) {
    if (ln.peek().kind != lex::Tok::Shape) ln.err("expected tile shape RxC");
    lex::Token t = ln.next();
    TileType tt;
    tt.rows = t.ival;
    tt.cols = t.ival2;
    tt.elem = parse_elem_word(ln);
    if (tt.rows < 1 || tt.cols < 1) ln.err("tile dimensions must be positive");
    return tt;
}

// Scoped helper that owns op emission and literal desugaring for one region.
struct OpSink {
    std::vector<Op>* ops = nullptr;
    std::set<std::string>* defined = nullptr;
    int* gensym = nullptr;

    std::string fresh(const std::string& prefix) {
        while (true) {
            std::string n = prefix + std::to_string((*gensym)++);
            if (!defined->count(n)) return n;
        }
    }

    std::string emit_const_int(int64_t v, int line) {
        Op op;
        op.kind = OpKind::Constant;
        op.int_literal = v;
        op.line = line;
        op.results.push_back(fresh("c"));
        defined->insert(op.results[0]);
        ops->push_back(op);
        return ops->back().results[0];
    }

    std::string emit_arith(ScalarFn f, const std::string& a, const std::string& b, int line) {
        Op op;
        op.kind = OpKind::IndexArith;
        op.sfn = f;
        op.operands = {a, b};
        op.line = line;
        op.results.push_back(fresh("e"));
        defined->insert(op.results[0]);
        ops->push_back(op);
        return ops->back().results[0];
    }
};

// Scalar expression sugar over + - * / % with %ids, integers, and pid.
// Desugars to Constant / IndexArith ops; returns the resulting value id.
inline std::string parse_scalar_expr(Line& ln, OpSink& sink);

inline std::string parse_scalar_term(Line& ln, OpSink& sink) {
    if (ln.accept_punct("(")) {
        std::string v = parse_scalar_expr(ln, sink);
        ln.expect_punct(")");
        return v;
    }
    if (ln.accept_punct("-")) {
        if (ln.peek().kind == lex::Tok::Int) {
            int64_t v = ln.next().ival;
            return sink.emit_const_int(-v, ln.line_no());
        }
        std::string a = parse_scalar_term(ln, sink);
        std::string zero = sink.emit_const_int(0, ln.line_no());
        return sink.emit_arith(ScalarFn::Sub, zero, a, ln.line_no());
    }
    if (ln.peek().kind == lex::Tok::ValueId) return ln.next().text;
    if (ln.peek().kind == lex::Tok::Int) return sink.emit_const_int(ln.next().ival, ln.line_no());
    if (ln.peek().kind == lex::Tok::Ident && ln.peek().text == "pid") {
        ln.next();
        Op op;
        op.kind = OpKind::IndexArith;
        op.sfn = ScalarFn::Pid;
        op.line = ln.line_no();
        op.results.push_back(sink.fresh("e"));
        sink.defined->insert(op.results[0]);
        sink.ops->push_back(op);
        return sink.ops->back().results[0];
    }
    ln.err("expected scalar operand");
}

inline std::string parse_scalar_factor(Line& ln, OpSink& sink) {
    std::string v = parse_scalar_term(ln, sink);
    while (true) {
        if (ln.accept_punct("*"))
            v = sink.emit_arith(ScalarFn::Mul, v, parse_scalar_term(ln, sink), ln.line_no());
        else if (ln.accept_punct("/"))
            v = sink.emit_arith(ScalarFn::Div, v, parse_scalar_term(ln, sink), ln.line_no());
        else if (ln.accept_punct("%"))
            v = sink.emit_arith(ScalarFn::Mod, v, parse_scalar_term(ln, sink), ln.line_no());
        else
            return v;
    }
}

inline std::string parse_scalar_expr(Line& ln, OpSink& sink) {
    std::string v = parse_scalar_factor(ln, sink);
    while (true) {
        if (ln.accept_punct("+"))
            v = sink.emit_arith(ScalarFn::Add, v, parse_scalar_factor(ln, sink), ln.line_no());
        else if (ln.accept_punct("-"))
            v = sink.emit_arith(ScalarFn::Sub, v, parse_scalar_factor(ln, sink), ln.line_no());
        else
            return v;
    }
}

// Operand position: %id or a desugared scalar expression.
inline std::string parse_operand(Line& ln, OpSink& sink) {
    if (ln.peek().kind == lex::Tok::ValueId && !(ln.peek(1).kind == lex::Tok::Punct &&
                                                 (ln.peek(1).text == "+" || ln.peek(1).text == "-" ||
                                                  ln.peek(1).text == "*" || ln.peek(1).text == "/" ||
                                                  ln.peek(1).text == "%")))
        return ln.next().text;
    return parse_scalar_expr(ln, sink);
}

inline int parse_channel_ref(Line& ln) {
    std::string w = ln.expect_any_ident();
    if (w.size() > 2 && w.rfind("ch", 0) == 0) {
        bool digits = true;
        for (size_t i = 2; i < w.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(w[i]))) digits = false;
        if (digits) return std::stoi(w.substr(2));
    }
    ln.err("expected channel reference ch<i>");
}

// [%k % D] | [(%k - L) % D] | [K % D]
inline SlotExpr parse_slot_expr(Line& ln, const std::string& induction) {
    SlotExpr se;
    ln.expect_punct("[");
    if (ln.accept_punct("(")) {
        std::string id = ln.expect_value();
        if (!induction.empty() && id != induction) ln.err("slot index must use the loop induction variable");
        ln.expect_punct("-");
        se.lag = ln.expect_int();
        ln.expect_punct(")");
        se.by_induction = true;
    } else if (ln.peek().kind == lex::Tok::ValueId) {
        std::string id = ln.expect_value();
        if (!induction.empty() && id != induction) ln.err("slot index must use the loop induction variable");
        se.by_induction = true;
        se.lag = 0;
    } else {
        se.by_induction = false;
        se.at = ln.expect_int();
    }
    ln.expect_punct("%");
    ln.expect_int();  // modulus is implied by the channel depth; checked in validation
    ln.expect_punct("]");
    return se;
}

inline void parse_guard_suffix(Line& ln, Op& op, const std::string& induction) {
    if (ln.accept_ident("when")) {
        std::string id = ln.expect_value();
        if (!induction.empty() && id != induction) ln.err("guard must test the loop induction variable");
        ln.expect_punct(">=");
        op.guard_min_k = ln.expect_int();
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Statement parser shared by kernel and warp-group region bodies.
// ---------------------------------------------------------------------------

namespace detail {

struct StmtCtx {
    std::vector<Op>* ops;
    std::set<std::string>* defined;
    int* gensym;
    std::string induction;  // empty outside loops
    bool in_loop = false;
    bool allow_ws_ops = false;
};

inline void define_results(StmtCtx& ctx, Op& op, Line& ln) {
    for (const auto& r : op.results) {
        if (ctx.defined->count(r)) ln.err("redefinition of %" + r);
        ctx.defined->insert(r);
    }
}

// Parses a single statement line into ctx.ops. Returns false if the line is
// not a statement (caller handles structural keywords).
inline bool parse_stmt(Line& ln, StmtCtx& ctx) {
    OpSink sink{ctx.ops, ctx.defined, ctx.gensym};

    // store <buf>[e, e] = %v
    if (ln.accept_ident("store")) {
        Op op;
        op.kind = OpKind::Store;
        op.line = ln.line_no();
        op.buffer = ln.expect_any_ident();
        ln.expect_punct("[");
        op.operands.push_back(parse_scalar_expr(ln, sink));
        ln.expect_punct(",");
        op.operands.push_back(parse_scalar_expr(ln, sink));
        ln.expect_punct("]");
        ln.expect_punct("=");
        op.operands.push_back(ln.expect_value());
        // stored value goes first, offsets after
        std::rotate(op.operands.begin(), op.operands.begin() + 2, op.operands.end());
        ln.expect_end();
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("yield")) {
        if (!ctx.in_loop) ln.err("yield outside loop");
        Op op;
        op.kind = OpKind::Yield;
        op.line = ln.line_no();
        op.operands.push_back(parse_operand(ln, sink));
        while (ln.accept_punct(",")) op.operands.push_back(parse_operand(ln, sink));
        ln.expect_end();
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("put")) {
        if (!ctx.allow_ws_ops) ln.err("put outside warp_group region");
        Op op;
        op.kind = OpKind::Put;
        op.line = ln.line_no();
        op.channel = parse_channel_ref(ln);
        op.slot = parse_slot_expr(ln, ctx.induction);
        ln.expect_punct(",");
        op.operands.push_back(ln.expect_value());
        while (ln.accept_punct(",")) op.operands.push_back(ln.expect_value());
        parse_guard_suffix(ln, op, ctx.induction);
        ln.expect_end();
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("consumed")) {
        if (!ctx.allow_ws_ops) ln.err("consumed outside warp_group region");
        Op op;
        op.kind = OpKind::Consumed;
        op.line = ln.line_no();
        op.channel = parse_channel_ref(ln);
        op.slot = parse_slot_expr(ln, ctx.induction);
        parse_guard_suffix(ln, op, ctx.induction);
        ln.expect_end();
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("mma_wait")) {
        if (!ctx.allow_ws_ops) ln.err("mma_wait outside warp_group region");
        Op op;
        op.kind = OpKind::MmaWait;
        op.line = ln.line_no();
        ln.expect_ident("pendings");
        ln.expect_punct("=");
        op.pendings = static_cast<int>(ln.expect_int());
        parse_guard_suffix(ln, op, ctx.induction);
        ln.expect_end();
        ctx.ops->push_back(op);
        return true;
    }

    bool issue = false;
    if (ln.peek().kind == lex::Tok::Ident && ln.peek().text == "mma_issue") {
        if (!ctx.allow_ws_ops) ln.err("mma_issue outside warp_group region");
        ln.next();
        issue = true;
    }

    if (ln.peek().kind != lex::Tok::ValueId) return false;

    // one or more results, '=' then an op
    std::vector<std::string> results;
    results.push_back(ln.expect_value());
    while (ln.accept_punct(",")) results.push_back(ln.expect_value());
    ln.expect_punct("=");

    if (ln.accept_ident("get")) {
        if (!ctx.allow_ws_ops) ln.err("get outside warp_group region");
        Op op;
        op.kind = OpKind::Get;
        op.line = ln.line_no();
        op.results = results;
        op.channel = parse_channel_ref(ln);
        op.slot = parse_slot_expr(ln, ctx.induction);
        parse_guard_suffix(ln, op, ctx.induction);
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }

    if (results.size() != 1) ln.err("only get may define multiple results");
    Op op;
    op.line = ln.line_no();
    op.results = results;

    if (ln.accept_ident("const")) {
        op.kind = OpKind::Constant;
        if (ln.accept_ident("zeros")) {
            ln.expect_punct(":");
            op.tile = parse_tile_type(ln);
            op.has_tile = true;
            op.zeros = true;
        } else if (ln.accept_punct("[")) {
            // [[a, b], [c, d]] : RxC elem
            bool any_real = false;
            std::vector<std::vector<double>> rows;
            while (true) {
                ln.expect_punct("[");
                std::vector<double> row;
                while (true) {
                    bool neg = ln.accept_punct("-");
                    if (ln.peek().kind == lex::Tok::Real) {
                        any_real = true;
                        row.push_back(ln.next().rval * (neg ? -1 : 1));
                    } else {
                        row.push_back(static_cast<double>(ln.expect_int()) * (neg ? -1 : 1));
                    }
                    if (!ln.accept_punct(",")) break;
                }
                ln.expect_punct("]");
                rows.push_back(std::move(row));
                if (!ln.accept_punct(",")) break;
            }
            ln.expect_punct("]");
            ln.expect_punct(":");
            op.tile = parse_tile_type(ln);
            op.has_tile = true;
            if (static_cast<int64_t>(rows.size()) != op.tile.rows) ln.err("tile literal row count mismatch");
            for (const auto& row : rows) {
                if (static_cast<int64_t>(row.size()) != op.tile.cols)
                    ln.err("tile literal column count mismatch");
                for (double v : row) {
                    if (op.tile.elem == Elem::Int) {
                        if (any_real) ln.err("real literal in int tile");
                        op.int_data.push_back(static_cast<int64_t>(v));
                    } else {
                        op.real_data.push_back(v);
                    }
                }
            }
        } else {
            bool neg = ln.accept_punct("-");
            op.int_literal = ln.expect_int() * (neg ? -1 : 1);
        }
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("pid")) {
        op.kind = OpKind::IndexArith;
        op.sfn = ScalarFn::Pid;
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }

    for (ScalarFn f : {ScalarFn::Add, ScalarFn::Sub, ScalarFn::Mul, ScalarFn::Div, ScalarFn::Mod}) {
        if (ln.accept_ident(scalar_fn_name(f))) {
            op.kind = OpKind::IndexArith;
            op.sfn = f;
            op.operands.push_back(parse_operand(ln, sink));
            ln.expect_punct(",");
            op.operands.push_back(parse_operand(ln, sink));
            ln.expect_end();
            define_results(ctx, op, ln);
            ctx.ops->push_back(op);
            return true;
        }
    }

    if (ln.accept_ident("tma_load")) {
        if (!ctx.in_loop) ln.err("tma_load only supported inside the loop body");
        op.kind = OpKind::TmaLoad;
        op.buffer = ln.expect_any_ident();
        ln.expect_punct("[");
        op.operands.push_back(parse_scalar_expr(ln, sink));
        ln.expect_punct(",");
        op.operands.push_back(parse_scalar_expr(ln, sink));
        ln.expect_punct("]");
        ln.expect_punct(":");
        op.tile = parse_tile_type(ln);
        op.has_tile = true;
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("dot")) {
        op.kind = issue ? OpKind::MmaIssue : OpKind::Dot;
        op.operands.push_back(ln.expect_value());
        ln.expect_punct(",");
        op.operands.push_back(ln.expect_value());
        if (ln.peek().kind == lex::Tok::TransposeMark) {
            ln.next();
            op.trans_b = true;
        }
        ln.expect_punct(",");
        ln.expect_ident("acc");
        ln.expect_punct("=");
        op.operands.push_back(ln.expect_value());
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }
    if (issue) ln.err("mma_issue expects a dot statement");

    if (ln.accept_ident("ew")) {
        op.kind = OpKind::Elementwise;
        std::string fn = ln.expect_any_ident();
        bool found = false;
        for (EwFn f : {EwFn::Add, EwFn::Sub, EwFn::Mul, EwFn::Max, EwFn::Min, EwFn::Relu, EwFn::Exp}) {
            if (fn == ew_fn_name(f)) {
                op.efn = f;
                found = true;
            }
        }
        if (!found) ln.err("unknown elementwise fn '" + fn + "'");
        op.operands.push_back(ln.expect_value());
        if (ln.accept_punct(",")) op.operands.push_back(ln.expect_value());
        if (ew_fn_unary(op.efn) != (op.operands.size() == 1))
            ln.err(std::string("ew ") + ew_fn_name(op.efn) + " takes " +
                   (ew_fn_unary(op.efn) ? "one operand" : "two operands"));
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }

    if (ln.accept_ident("reduce")) {
        op.kind = OpKind::Reduce;
        std::string fn = ln.expect_any_ident();
        bool found = false;
        for (ReduceFn f : {ReduceFn::Add, ReduceFn::Max, ReduceFn::Min}) {
            if (fn == reduce_fn_name(f)) {
                op.rfn = f;
                found = true;
            }
        }
        if (!found) ln.err("unknown reduce fn '" + fn + "'");
        op.operands.push_back(ln.expect_value());
        ln.expect_ident("axis");
        ln.expect_punct("=");
        op.axis = static_cast<int>(ln.expect_int());
        if (op.axis != 0 && op.axis != 1) ln.err("axis must be 0 or 1");
        ln.expect_end();
        define_results(ctx, op, ln);
        ctx.ops->push_back(op);
        return true;
    }

    ln.err("unknown statement");
}

struct LineStream {
    std::vector<Line> lines;
    size_t pos = 0;

    explicit LineStream(const std::string& text) {
        int n = 0;
        size_t start = 0;
        while (start <= text.size()) {
            size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            ++n;
            auto toks = lex::tokenize_line(text.substr(start, end - start), n);
            if (!toks.empty()) lines.emplace_back(std::move(toks), n);
            start = end + 1;
            if (end == text.size()) break;
        }
    }

    bool done() const { return pos >= lines.size(); }
    Line& peek() { return lines[pos]; }
    Line take() { return lines[pos++]; }
    [[noreturn]] void err(const std::string& m) {
        if (done()) fail(ErrorCode::Parse, "unexpected end of input: " + m);
        lines[pos].err(m);
    }
};

inline std::vector<Param> parse_params(Line& ln) {
    std::vector<Param> params;
    ln.expect_punct("(");
    if (!ln.accept_punct(")")) {
        while (true) {
            Param p;
            p.name = ln.expect_any_ident();
            ln.expect_punct(":");
            ln.expect_ident("buf");
            ln.expect_punct("<");
            p.type = parse_tile_type(ln);
            ln.expect_punct(">");
            params.push_back(p);
            if (ln.accept_punct(")")) break;
            ln.expect_punct(",");
        }
    }
    return params;
}

// loop %k in A..B [iter (%x = <opnd>, ...)] {
inline LoopRegion parse_loop_header(Line& ln, StmtCtx& outer) {
    LoopRegion loop;
    loop.induction = ln.expect_value();
    ln.expect_ident("in");
    int64_t lo = ln.expect_int();
    if (ln.peek().kind != lex::Tok::DotDot) ln.err("expected '..'");
    ln.next();
    int64_t hi = ln.expect_int();
    if (lo != 0) ln.err("loop lower bound must be 0");
    if (hi < 0) ln.err("negative trip count");
    loop.trip = hi;
    if (ln.accept_ident("iter")) {
        ln.expect_punct("(");
        OpSink sink{outer.ops, outer.defined, outer.gensym};
        while (true) {
            IterArg a;
            a.name = ln.expect_value();
            ln.expect_punct("=");
            a.init = parse_operand(ln, sink);
            loop.iter_args.push_back(a);
            if (ln.accept_punct(")")) break;
            ln.expect_punct(",");
        }
    }
    ln.expect_punct("{");
    ln.expect_end();
    return loop;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// parse_kernel
// ---------------------------------------------------------------------------

inline KernelGraph parse_kernel_text(const std::string& text) {
    detail::LineStream ls(text);
    if (ls.done()) fail(ErrorCode::Parse, "empty input");

    KernelGraph g;
    {
        detail::Line hdr = ls.take();
        hdr.expect_ident("kernel");
        g.name = hdr.expect_any_ident();
        g.params = detail::parse_params(hdr);
        hdr.expect_punct("{");
        hdr.expect_end();
    }

    std::set<std::string> defined;
    for (const auto& p : g.params) defined.insert(p.name);
    int gensym = 0;
    bool saw_loop = false;
    bool closed = false;

    detail::StmtCtx ctx{&g.prologue, &defined, &gensym, "", false, false};

    while (!ls.done()) {
        detail::Line ln = ls.take();
        if (ln.accept_punct("}")) {
            ln.expect_end();
            closed = true;
            break;
        }
        if (ln.accept_ident("loop")) {
            if (saw_loop) ln.err("multiple loops are not supported");
            saw_loop = true;
            detail::StmtCtx hdr_ctx{&g.prologue, &defined, &gensym, "", false, false};
            g.loop = detail::parse_loop_header(ln, hdr_ctx);
            if (defined.count(g.loop.induction)) ln.err("redefinition of %" + g.loop.induction);
            defined.insert(g.loop.induction);
            for (const auto& a : g.loop.iter_args) {
                if (defined.count(a.name)) ln.err("redefinition of %" + a.name);
                defined.insert(a.name);
            }
            detail::StmtCtx body_ctx{&g.loop.body, &defined, &gensym, g.loop.induction, true, false};
            bool body_closed = false;
            while (!ls.done()) {
                detail::Line bln = ls.take();
                if (bln.accept_punct("}")) {
                    bln.expect_end();
                    body_closed = true;
                    break;
                }
                if (bln.peek().kind == lex::Tok::Ident && bln.peek().text == "loop")
                    bln.err("nested loops are not supported");
                if (!detail::parse_stmt(bln, body_ctx)) bln.err("unknown statement");
            }
            if (!body_closed) fail(ErrorCode::Parse, "unterminated loop body");
            ctx = detail::StmtCtx{&g.epilogue, &defined, &gensym, "", false, false};
            continue;
        }
        if (!detail::parse_stmt(ln, ctx)) ln.err("unknown statement");
    }
    if (!closed) fail(ErrorCode::Parse, "missing closing '}'");
    while (!ls.done()) ls.take().err("content after kernel close");
    if (!saw_loop) {
        // loop-free kernel: a trip-0 loop with everything in the epilogue
        g.epilogue = std::move(g.prologue);
        g.prologue.clear();
    }
    return g;
}

// ---------------------------------------------------------------------------
// parse_program: the extended warp-group form emitted after partitioning.
// The coarse-grained `pipeline` block is print-only and not accepted here.
// ---------------------------------------------------------------------------

inline WarpSpecProgram parse_program_text(const std::string& text) {
    detail::LineStream ls(text);
    if (ls.done()) fail(ErrorCode::Parse, "empty input");

    WarpSpecProgram prog;
    {
        detail::Line hdr = ls.take();
        hdr.expect_ident("program");
        prog.name = hdr.expect_any_ident();
        prog.params = detail::parse_params(hdr);
        hdr.expect_punct("{");
        hdr.expect_end();
    }

    bool closed = false;
    while (!ls.done()) {
        detail::Line ln = ls.take();
        if (ln.accept_punct("}")) {
            ln.expect_end();
            closed = true;
            break;
        }
        if (ln.accept_ident("channel")) {
            Channel ch;
            ch.id = detail::parse_channel_ref(ln);
            if (ch.id != static_cast<int>(prog.channels.size()))
                ln.err("channels must be declared in order");
            ln.expect_punct(":");
            ln.expect_ident("depth");
            ch.depth = static_cast<int>(ln.expect_int());
            if (ch.depth < 1) ln.err("channel depth must be positive");
            ln.expect_punct(",");
            ln.expect_ident("tuple");
            ln.expect_punct("<");
            while (true) {
                ch.members.push_back(detail::parse_tile_type(ln));
                if (ln.accept_punct(">")) break;
                ln.expect_punct(",");
            }
            ln.expect_end();
            prog.channels.push_back(ch);
            continue;
        }
        if (ln.accept_ident("warp_group")) {
            Region region;
            ln.expect_int();  // ordinal; implied by position
            ln.expect_ident("partition");
            ln.expect_punct("=");
            region.partition = static_cast<int>(ln.expect_int());
            ln.expect_punct("{");
            ln.expect_end();

            std::set<std::string> defined;
            for (const auto& p : prog.params) defined.insert(p.name);
            int gensym = 0;
            bool saw_loop = false;
            bool region_closed = false;
            detail::StmtCtx ctx{&region.prologue, &defined, &gensym, "", false, true};
            while (!ls.done()) {
                detail::Line rln = ls.take();
                if (rln.accept_punct("}")) {
                    rln.expect_end();
                    region_closed = true;
                    break;
                }
                if (rln.accept_ident("pipeline"))
                    rln.err("pipelined coarse form is print-only and cannot be parsed back");
                if (rln.accept_ident("loop")) {
                    if (saw_loop) rln.err("multiple loops in region");
                    saw_loop = true;
                    detail::StmtCtx hdr_ctx{&region.prologue, &defined, &gensym, "", false, true};
                    region.loop = detail::parse_loop_header(rln, hdr_ctx);
                    if (defined.count(region.loop.induction))
                        rln.err("redefinition of %" + region.loop.induction);
                    defined.insert(region.loop.induction);
                    for (const auto& a : region.loop.iter_args) {
                        if (defined.count(a.name)) rln.err("redefinition of %" + a.name);
                        defined.insert(a.name);
                    }
                    detail::StmtCtx body_ctx{&region.loop.body, &defined, &gensym,
                                             region.loop.induction, true, true};
                    bool body_closed = false;
                    while (!ls.done()) {
                        detail::Line bln = ls.take();
                        if (bln.accept_punct("}")) {
                            bln.expect_end();
                            body_closed = true;
                            break;
                        }
                        if (!detail::parse_stmt(bln, body_ctx)) bln.err("unknown statement");
                    }
                    if (!body_closed) fail(ErrorCode::Parse, "unterminated loop body");
                    ctx = detail::StmtCtx{&region.epilogue, &defined, &gensym, "", false, true};
                    continue;
                }
                if (!detail::parse_stmt(rln, ctx)) rln.err("unknown statement");
            }
            if (!region_closed) fail(ErrorCode::Parse, "unterminated warp_group region");
            prog.regions.push_back(std::move(region));
            continue;
        }
        ln.err("expected channel, warp_group, or '}'");
    }
    if (!closed) fail(ErrorCode::Parse, "missing closing '}'");
    while (!ls.done()) ls.take().err("content after program close");
    return prog;
}

}  // namespace warpspec
