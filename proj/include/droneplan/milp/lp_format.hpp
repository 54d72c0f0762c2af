#ifndef DRONEPLAN_MILP_LP_FORMAT_HPP
#define DRONEPLAN_MILP_LP_FORMAT_HPP

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "droneplan/milp/model.hpp"

namespace droneplan::milp {

namespace lp_detail {

inline const std::unordered_set<std::string>& reserved_words() {
    static const std::unordered_set<std::string> words = {
        "minimize", "maximize", "min",      "max",     "subject",  "such", "to",
        "st",       "s.t.",     "bounds",   "bound",   "general",  "gen",
        "generals", "integer",  "integers", "binary",  "binaries", "bin",
        "end",      "free",     "infinity", "inf"};
    return words;
}

inline std::string lower_copy(const std::string& s) {
    std::string out = s;
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool plain_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

inline void append_escaped(std::string& out, char c) {
    char buf[4];
    std::snprintf(buf, sizeof buf, "~%02X", static_cast<unsigned char>(c));
    out += buf;
}

/// Maps an arbitrary name onto the LP-safe alphabet. The mapping is a
/// bijection: every unsafe byte (and '~' itself) becomes ~HH, a leading
/// digit or '.' is escaped, and names that collide with format keywords get
/// their first character escaped.
inline std::string escape_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    bool force_escape_first =
        !name.empty() &&
        (std::isdigit(static_cast<unsigned char>(name[0])) || name[0] == '.');
    if (reserved_words().count(lower_copy(name))) force_escape_first = true;
    for (std::size_t i = 0; i < name.size(); ++i) {
        char c = name[i];
        if ((i == 0 && force_escape_first) || c == '~' || !plain_name_char(c))
            append_escaped(out, c);
        else
            out += c;
    }
    return out;
}

inline std::string unescape_name(const std::string& token) {
    std::string out;
    for (std::size_t i = 0; i < token.size(); ++i) {
        if (token[i] != '~') {
            out += token[i];
            continue;
        }
        if (i + 2 >= token.size())
            throw std::runtime_error("truncated ~HH escape in name " + token);
        auto hex = [&](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            throw std::runtime_error("bad hex digit in name escape of " + token);
        };
        out += static_cast<char>(hex(token[i + 1]) * 16 + hex(token[i + 2]));
        i += 2;
    }
    return out;
}

inline std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void append_expression(std::string& out, const std::vector<LinearTerm>& terms,
                              double constant, const std::vector<Variable>& vars) {
    std::size_t line_len = out.size();
    for (std::size_t k = out.rfind('\n'); k != std::string::npos;) {
        line_len = out.size() - k - 1;
        break;
    }
    bool first = true;
    auto push = [&](const std::string& piece) {
        if (line_len + piece.size() > 200) {
            out += "\n   ";
            line_len = 3;
        }
        out += piece;
        line_len += piece.size();
    };
    for (const auto& t : terms) {
        double c = t.coef;
        std::string piece;
        if (first) {
            piece = (c < 0.0 ? "-" : "") + format_number(std::abs(c));
        } else {
            piece = (c < 0.0 ? " - " : " + ") + format_number(std::abs(c));
        }
        piece += " " + escape_name(vars[t.var].name);
        push(piece);
        first = false;
    }
    if (constant != 0.0 || first) {
        std::string piece;
        if (first)
            piece = (constant < 0.0 ? "-" : "") + format_number(std::abs(constant));
        else
            piece = (constant < 0.0 ? " - " : " + ") + format_number(std::abs(constant));
        push(piece);
    }
}

}  // namespace lp_detail

/// Renders the model in CPLEX-style LP text: sense, objective, rows, an
/// explicit Bounds entry for every variable (in column order, which lets the
/// importer restore the exact column order), Generals/Binaries, End.
/// Numbers carry 17 significant digits so doubles survive a round trip.
inline std::string export_lp_text(const MILPModel& model) {
    {
        auto violations = model.validate();
        if (!violations.empty())
            throw std::invalid_argument("cannot export invalid model: " + violations.front());
    }
    std::string out;
    out += model.sense == Sense::MINIMIZE ? "Minimize\n" : "Maximize\n";
    out += " " + lp_detail::escape_name(model.objective_name) + ": ";
    lp_detail::append_expression(out, model.objective, model.objective_constant,
                                 model.variables);
    out += "\n";
    if (!model.constraints.empty()) {
        out += "Subject To\n";
        for (const auto& c : model.constraints) {
            out += " " + lp_detail::escape_name(c.name) + ": ";
            lp_detail::append_expression(out, c.terms, 0.0, model.variables);
            switch (c.relation) {
                case Relation::LESS_EQUAL: out += " <= "; break;
                case Relation::GREATER_EQUAL: out += " >= "; break;
                case Relation::EQUAL: out += " = "; break;
            }
            out += lp_detail::format_number(c.rhs) + "\n";
        }
    }
    out += "Bounds\n";
    for (const auto& v : model.variables) {
        std::string n = lp_detail::escape_name(v.name);
        bool lo = std::isfinite(v.lower);
        bool up = std::isfinite(v.upper);
        if (v.lower == v.upper) {
            out += " " + n + " = " + lp_detail::format_number(v.lower) + "\n";
        } else if (!lo && !up) {
            out += " " + n + " free\n";
        } else if (!lo) {
            out += " -infinity <= " + n + " <= " + lp_detail::format_number(v.upper) + "\n";
        } else if (!up) {
            out += " " + n + " >= " + lp_detail::format_number(v.lower) + "\n";
        } else {
            out += " " + lp_detail::format_number(v.lower) + " <= " + n + " <= " +
                   lp_detail::format_number(v.upper) + "\n";
        }
    }
    std::string generals, binaries;
    for (const auto& v : model.variables) {
        if (v.kind == VarKind::INTEGER)
            generals += " " + lp_detail::escape_name(v.name) + "\n";
        else if (v.kind == VarKind::BINARY)
            binaries += " " + lp_detail::escape_name(v.name) + "\n";
    }
    if (!generals.empty()) out += "Generals\n" + generals;
    if (!binaries.empty()) out += "Binaries\n" + binaries;
    out += "End\n";
    return out;
}

namespace lp_detail {

struct Token {
    enum class Kind { NAME, NUMBER, OP, END_OF_INPUT } kind = Kind::END_OF_INPUT;
    std::string text;
    double number = 0.0;
    int line = 0;
    int column = 0;
};

class Scanner {
  public:
    explicit Scanner(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const Token& at, const std::string& msg) const {
        throw std::runtime_error("lp parse error at line " + std::to_string(at.line) +
                                 ", column " + std::to_string(at.column) + ": " + msg);
    }

  private:
    void advance() {
        skip_space_and_comments();
        current_ = Token{};
        current_.line = line_;
        current_.column = column_;
        if (pos_ >= text_.size()) {
            current_.kind = Token::Kind::END_OF_INPUT;
            current_.text = "<eof>";
            return;
        }
        char c = text_[pos_];
        if (c == '<' || c == '>' || c == '=' || c == '+' || c == '-' || c == ':') {
            current_.kind = Token::Kind::OP;
            current_.text = take_char();
            if ((current_.text == "<" || current_.text == ">") && pos_ < text_.size() &&
                text_[pos_] == '=')
                current_.text += take_char();
            else if (current_.text == "=" && pos_ < text_.size() &&
                     (text_[pos_] == '<' || text_[pos_] == '>'))
                current_.text = take_char() + std::string("=");  // =< and => variants
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            std::string num;
            bool saw_exp = false;
            while (pos_ < text_.size()) {
                char d = text_[pos_];
                if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
                    num += take_char();
                } else if ((d == 'e' || d == 'E') && !saw_exp && pos_ + 1 < text_.size() &&
                           (std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                            ((text_[pos_ + 1] == '+' || text_[pos_ + 1] == '-') &&
                             pos_ + 2 < text_.size() &&
                             std::isdigit(static_cast<unsigned char>(text_[pos_ + 2]))))) {
                    saw_exp = true;
                    num += take_char();  // e
                    if (text_[pos_] == '+' || text_[pos_] == '-') num += take_char();
                } else {
                    break;
                }
            }
            const char* begin = num.c_str();
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end != begin + num.size())
                fail(current_, "malformed number '" + num + "'");
            current_.kind = Token::Kind::NUMBER;
            current_.text = num;
            current_.number = v;
            return;
        }
        if (plain_name_char(c) || c == '~') {
            std::string name;
            while (pos_ < text_.size() &&
                   (plain_name_char(text_[pos_]) || text_[pos_] == '~'))
                name += take_char();
            current_.kind = Token::Kind::NAME;
            current_.text = name;
            return;
        }
        fail(current_, std::string("invalid character (byte 0x") +
                           [&] {
                               char buf[8];
                               std::snprintf(buf, sizeof buf, "%02X",
                                             static_cast<unsigned char>(c));
                               return std::string(buf);
                           }() +
                           ")");
    }

    std::string take_char() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return std::string(1, c);
    }

    void skip_space_and_comments() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\\') {
                while (pos_ < text_.size() && text_[pos_] != '\n') take_char();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                take_char();
            } else {
                break;
            }
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    Token current_;
};

inline bool is_keyword(const Token& t, const char* word) {
    return t.kind == Token::Kind::NAME && lower_copy(t.text) == word;
}

/// True when the scanner sits on a section keyword.
inline bool at_section(const Scanner& sc) {
    const Token& t = sc.peek();
    if (t.kind != Token::Kind::NAME) return t.kind == Token::Kind::END_OF_INPUT;
    std::string w = lower_copy(t.text);
    return w == "subject" || w == "st" || w == "s.t." || w == "such" || w == "bounds" ||
           w == "bound" || w == "general" || w == "generals" || w == "gen" ||
           w == "integer" || w == "integers" || w == "binary" || w == "binaries" ||
           w == "bin" || w == "end" || w == "minimize" || w == "maximize" ||
           w == "min" || w == "max";
}

}  // namespace lp_detail

/// Parses LP text back into a model. Accepts the canonical form written by
/// export_lp_text plus the usual notational variants (st/s.t., =<, =>,
/// juxtaposed coefficients). Unknown bytes -- including typographic minus
/// signs -- are reported with line and column.
inline MILPModel import_lp_text(const std::string& text) {
    using lp_detail::Scanner;
    using lp_detail::Token;
    Scanner sc(text);
    MILPModel model;

    std::unordered_map<std::string, int> index;
    std::vector<int> bounds_order;
    std::vector<bool> bounds_seen;
    auto var_of = [&](const std::string& escaped) {
        std::string name = lp_detail::unescape_name(escaped);
        auto it = index.find(name);
        if (it != index.end()) return it->second;
        int j = model.add_variable(name, 0.0, kInfinity, VarKind::CONTINUOUS);
        index.emplace(name, j);
        bounds_seen.push_back(false);
        return j;
    };

    // Expression := [sign] (number [name] | name) { (+|-) (number [name] | name) }
    // Returns the accumulated constant part.
    auto parse_expression = [&](std::vector<LinearTerm>& terms) {
        double constant = 0.0;
        bool expect_term = true;
        double sign = 1.0;
        for (;;) {
            const Token& t = sc.peek();
            if (t.kind == Token::Kind::OP && (t.text == "+" || t.text == "-")) {
                sc.take();
                if (t.text == "-") sign = -sign;
                expect_term = true;
                continue;
            }
            if (t.kind == Token::Kind::NUMBER) {
                Token num = sc.take();
                const Token& after = sc.peek();
                if (after.kind == Token::Kind::NAME && !lp_detail::at_section(sc)) {
                    Token name = sc.take();
                    terms.push_back({var_of(name.text), sign * num.number});
                } else {
                    constant += sign * num.number;
                }
                sign = 1.0;
                expect_term = false;
                continue;
            }
            if (t.kind == Token::Kind::NAME && !lp_detail::at_section(sc)) {
                Token name = sc.take();
                terms.push_back({var_of(name.text), sign});
                sign = 1.0;
                expect_term = false;
                continue;
            }
            if (expect_term && sign != 1.0) sc.fail(t, "dangling sign in expression");
            return constant;
        }
    };

    // Sense.
    {
        const Token& t = sc.peek();
        if (lp_detail::is_keyword(t, "minimize") || lp_detail::is_keyword(t, "min")) {
            model.sense = Sense::MINIMIZE;
            sc.take();
        } else if (lp_detail::is_keyword(t, "maximize") || lp_detail::is_keyword(t, "max")) {
            model.sense = Sense::MAXIMIZE;
            sc.take();
        } else {
            sc.fail(t, "expected Minimize or Maximize");
        }
    }

    // Objective, with optional label.
    {
        model.objective_name = "obj";
        if (sc.peek().kind == Token::Kind::NAME) {
            Token name = sc.take();
            if (sc.peek().kind == Token::Kind::OP && sc.peek().text == ":") {
                sc.take();
                model.objective_name = lp_detail::unescape_name(name.text);
            } else {
                // Not a label: first objective term. Re-inject by handling here.
                model.objective.push_back({var_of(name.text), 1.0});
            }
        }
        model.objective_constant += parse_expression(model.objective);
    }

    // Constraint section.
    if (lp_detail::is_keyword(sc.peek(), "subject") || lp_detail::is_keyword(sc.peek(), "such")) {
        sc.take();
        if (!lp_detail::is_keyword(sc.peek(), "to"))
            sc.fail(sc.peek(), "expected 'To' after 'Subject'");
        sc.take();
    } else if (lp_detail::is_keyword(sc.peek(), "st") || lp_detail::is_keyword(sc.peek(), "s.t.")) {
        sc.take();
    }
    for (;;) {
        const Token& t = sc.peek();
        if (t.kind == Token::Kind::END_OF_INPUT || lp_detail::at_section(sc)) break;
        Constraint row;
        row.name = "c" + std::to_string(model.constraints.size() + 1);
        if (t.kind == Token::Kind::NAME) {
            Token name = sc.take();
            if (sc.peek().kind == Token::Kind::OP && sc.peek().text == ":") {
                sc.take();
                row.name = lp_detail::unescape_name(name.text);
            } else {
                row.terms.push_back({var_of(name.text), 1.0});
            }
        }
        double lhs_constant = parse_expression(row.terms);
        const Token& rel = sc.peek();
        if (rel.kind != Token::Kind::OP ||
            (rel.text != "<=" && rel.text != ">=" && rel.text != "=" && rel.text != "<" &&
             rel.text != ">"))
            sc.fail(rel, "expected a relation (<=, >=, =) in constraint " + row.name);
        sc.take();
        row.relation = rel.text[0] == '<'   ? Relation::LESS_EQUAL
                       : rel.text[0] == '>' ? Relation::GREATER_EQUAL
                                            : Relation::EQUAL;
        double rhs_sign = 1.0;
        while (sc.peek().kind == Token::Kind::OP &&
               (sc.peek().text == "+" || sc.peek().text == "-")) {
            if (sc.take().text == "-") rhs_sign = -rhs_sign;
        }
        const Token& rhs = sc.peek();
        if (rhs.kind != Token::Kind::NUMBER)
            sc.fail(rhs, "expected numeric right-hand side in constraint " + row.name);
        row.rhs = rhs_sign * sc.take().number - lhs_constant;
        model.constraints.push_back(std::move(row));
    }

    // Bounds / Generals / Binaries sections in any order.
    auto read_signed_value = [&]() {
        double s = 1.0;
        while (sc.peek().kind == Token::Kind::OP &&
               (sc.peek().text == "+" || sc.peek().text == "-")) {
            if (sc.take().text == "-") s = -s;
        }
        const Token& t = sc.peek();
        if (t.kind == Token::Kind::NAME &&
            (lp_detail::lower_copy(t.text) == "infinity" ||
             lp_detail::lower_copy(t.text) == "inf")) {
            sc.take();
            return s * kInfinity;
        }
        if (t.kind != Token::Kind::NUMBER) sc.fail(t, "expected a bound value");
        return s * sc.take().number;
    };

    for (;;) {
        const Token& t = sc.peek();
        if (t.kind == Token::Kind::END_OF_INPUT) break;
        if (lp_detail::is_keyword(t, "end")) {
            sc.take();
            break;
        }
        if (lp_detail::is_keyword(t, "bounds") || lp_detail::is_keyword(t, "bound")) {
            sc.take();
            for (;;) {
                const Token& u = sc.peek();
                if (u.kind == Token::Kind::END_OF_INPUT || lp_detail::at_section(sc)) break;
                if (u.kind == Token::Kind::NAME) {
                    // Forms: name free | name = v | name >= v | name <= v
                    Token name = sc.take();
                    int j = var_of(name.text);
                    if (!bounds_seen[static_cast<std::size_t>(j)]) {
                        bounds_seen[static_cast<std::size_t>(j)] = true;
                        bounds_order.push_back(j);
                    }
                    const Token& op = sc.peek();
                    if (lp_detail::is_keyword(op, "free")) {
                        sc.take();
                        model.variables[j].lower = -kInfinity;
                        model.variables[j].upper = kInfinity;
                    } else if (op.kind == Token::Kind::OP &&
                               (op.text == "<=" || op.text == "<")) {
                        sc.take();
                        model.variables[j].upper = read_signed_value();
                    } else if (op.kind == Token::Kind::OP &&
                               (op.text == ">=" || op.text == ">")) {
                        sc.take();
                        model.variables[j].lower = read_signed_value();
                    } else if (op.kind == Token::Kind::OP && op.text == "=") {
                        sc.take();
                        double v = read_signed_value();
                        model.variables[j].lower = v;
                        model.variables[j].upper = v;
                    } else {
                        sc.fail(op, "malformed bound for " +
                                        lp_detail::unescape_name(name.text));
                    }
                } else {
                    // Form: value <= name [<= value]
                    double lo = read_signed_value();
                    const Token& op = sc.peek();
                    if (op.kind != Token::Kind::OP || (op.text != "<=" && op.text != "<"))
                        sc.fail(op, "expected <= in range bound");
                    sc.take();
                    const Token& name = sc.peek();
                    if (name.kind != Token::Kind::NAME)
                        sc.fail(name, "expected a variable name in range bound");
                    int j = var_of(sc.take().text);
                    if (!bounds_seen[static_cast<std::size_t>(j)]) {
                        bounds_seen[static_cast<std::size_t>(j)] = true;
                        bounds_order.push_back(j);
                    }
                    model.variables[j].lower = lo;
                    if (sc.peek().kind == Token::Kind::OP &&
                        (sc.peek().text == "<=" || sc.peek().text == "<")) {
                        sc.take();
                        model.variables[j].upper = read_signed_value();
                    }
                }
            }
            continue;
        }
        bool generals = lp_detail::is_keyword(t, "general") ||
                        lp_detail::is_keyword(t, "generals") ||
                        lp_detail::is_keyword(t, "gen") ||
                        lp_detail::is_keyword(t, "integer") ||
                        lp_detail::is_keyword(t, "integers");
        bool binaries = lp_detail::is_keyword(t, "binary") ||
                        lp_detail::is_keyword(t, "binaries") || lp_detail::is_keyword(t, "bin");
        if (generals || binaries) {
            sc.take();
            for (;;) {
                const Token& u = sc.peek();
                if (u.kind != Token::Kind::NAME || lp_detail::at_section(sc)) break;
                int j = var_of(sc.take().text);
                model.variables[j].kind = generals ? VarKind::INTEGER : VarKind::BINARY;
                if (binaries && !bounds_seen[static_cast<std::size_t>(j)]) {
                    model.variables[j].lower = 0.0;
                    model.variables[j].upper = 1.0;
                }
            }
            continue;
        }
        sc.fail(t, "unexpected token '" + t.text + "'");
    }

    // Canonical exports list every variable in the Bounds section in column
    // order; when that holds, restore that order so export -> import is the
    // identity on the model.
    if (bounds_order.size() == model.variables.size()) {
        std::vector<int> perm(model.variables.size());
        for (std::size_t k = 0; k < bounds_order.size(); ++k)
            perm[static_cast<std::size_t>(bounds_order[k])] = static_cast<int>(k);
        std::vector<Variable> vars(model.variables.size());
        for (std::size_t j = 0; j < model.variables.size(); ++j)
            vars[static_cast<std::size_t>(perm[j])] = model.variables[j];
        model.variables = std::move(vars);
        for (auto& term : model.objective) term.var = perm[static_cast<std::size_t>(term.var)];
        for (auto& row : model.constraints)
            for (auto& term : row.terms) term.var = perm[static_cast<std::size_t>(term.var)];
    }
    return model;
}

}  // namespace droneplan::milp

#endif  // DRONEPLAN_MILP_LP_FORMAT_HPP
