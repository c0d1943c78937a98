#include "celds/property.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <sstream>

#include "celds/errors.hpp"
#include "lexer.hpp"

namespace celds {

using detail::TokenKind;
using detail::TokenStream;
using Op = Expr::Op;

Expr Expr::make_const(Value v)
{
    Expr e;
    e.op = Op::Const;
    e.constant = std::move(v);
    return e;
}

Expr Expr::make_read(Location loc)
{
    Expr e;
    e.op = Op::Read;
    e.location = std::move(loc);
    return e;
}

Expr Expr::unary(Op op, Expr a)
{
    Expr e;
    e.op = op;
    e.args.push_back(std::move(a));
    return e;
}

Expr Expr::binary(Op op, Expr a, Expr b)
{
    Expr e;
    e.op = op;
    e.args.push_back(std::move(a));
    e.args.push_back(std::move(b));
    return e;
}

namespace {

std::string_view domain_name(Domain d)
{
    switch (d) {
    case Domain::Self: return "Self";
    case Domain::Node: return "Node";
    case Domain::Monitor: return "Monitor";
    case Domain::Heartbeat: return "Heartbeat";
    case Domain::Leader: return "Leader";
    case Domain::Controller: return "Controller";
    case Domain::Action: return "Action";
    case Domain::Session: return "Session";
    }
    return "?";
}

std::string_view op_text(Op op)
{
    switch (op) {
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Implies: return "implies";
    case Op::Eq: return "=";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Add: return "+";
    case Op::Not: return "not";
    case Op::AG: return "ag";
    case Op::AX: return "ax";
    case Op::EX: return "ex";
    case Op::EF: return "ef";
    default: return "?";
    }
}

std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::optional<Op> temporal_op(const std::string& word)
{
    const std::string w = lower(word);
    if (w == "ag") return Op::AG;
    if (w == "ax") return Op::AX;
    if (w == "ex") return Op::EX;
    if (w == "ef") return Op::EF;
    return std::nullopt;
}

bool unsupported_op(const std::string& word)
{
    static const char* names[] = {"af", "eg", "au", "eu", "aw", "ew", "ar", "er", "until", "u", "a", "e",
                                  "g",  "f",  "x",  "ag_", "release", "w"};
    const std::string w = lower(word);
    return std::find(std::begin(names), std::end(names), w) != std::end(names);
}

class Parser {
public:
    explicit Parser(TokenStream& ts) : ts_(ts) {}

    Expr formula() { return implies(); }

private:
    Expr implies()
    {
        Expr lhs = disjunction();
        if (ts_.accept("implies"))
            return Expr::binary(Op::Implies, std::move(lhs), implies());
        return lhs;
    }

    Expr disjunction()
    {
        Expr e = conjunction();
        while (ts_.accept("or"))
            e = Expr::binary(Op::Or, std::move(e), conjunction());
        return e;
    }

    Expr conjunction()
    {
        Expr e = negation();
        while (ts_.accept("and"))
            e = Expr::binary(Op::And, std::move(e), negation());
        return e;
    }

    Expr negation()
    {
        if (ts_.accept("not"))
            return Expr::unary(Op::Not, negation());
        return comparison();
    }

    Expr comparison()
    {
        Expr lhs = sum();
        static const std::pair<const char*, Op> ops[] = {{"=", Op::Eq},  {"!=", Op::Ne}, {"<=", Op::Le},
                                                         {">=", Op::Ge}, {"<", Op::Lt},  {">", Op::Gt}};
        for (const auto& [text, op] : ops)
            if (ts_.accept(text))
                return Expr::binary(op, std::move(lhs), sum());
        return lhs;
    }

    Expr sum()
    {
        Expr e = primary();
        while (ts_.accept("+"))
            e = Expr::binary(Op::Add, std::move(e), primary());
        return e;
    }

    Expr number(bool negative)
    {
        const auto& t = ts_.expect(TokenKind::Number, "a number");
        if (t.text.find('.') != std::string::npos) {
            const double d = std::strtod(t.text.c_str(), nullptr);
            return Expr::make_const(negative ? -d : d);
        }
        const auto i = static_cast<std::int64_t>(std::strtoll(t.text.c_str(), nullptr, 10));
        return Expr::make_const(negative ? -i : i);
    }

    Expr primary()
    {
        const auto& t = ts_.peek();
        if (ts_.accept("(")) {
            Expr e = formula();
            ts_.expect(")");
            return e;
        }
        if (t.kind == TokenKind::Number)
            return number(false);
        if (ts_.accept("-"))
            return number(true);
        if (t.kind != TokenKind::Ident)
            ts_.fail("expected an expression");

        const std::string word = t.text;
        const int line = t.line;
        if (word == "forall") {
            ts_.next();
            Expr e;
            e.op = Op::Forall;
            e.var = ts_.expect(TokenKind::Ident, "a variable").text;
            if (e.var.empty() || e.var[0] != '$')
                throw ParseError("quantified variable must start with '$': " + e.var, line);
            ts_.expect("in");
            const auto& d = ts_.expect(TokenKind::Ident, "a domain");
            auto domain = parse_domain(d.text);
            if (!domain)
                throw ParseError("unknown domain '" + d.text + "'", d.line);
            e.domain = *domain;
            ts_.expect("with");
            e.args.push_back(formula());
            return e;
        }

        const bool call = ts_.peek(1).kind == TokenKind::Punct && ts_.peek(1).text == "(";
        if (call) {
            if (find_function(word)) {
                ts_.next();
                ts_.expect("(");
                const std::string arg = ts_.expect(TokenKind::Ident, "an argument").text;
                ts_.expect(")");
                return Expr::make_read(Location{word, arg});
            }
            if (auto op = temporal_op(word)) {
                ts_.next();
                ts_.expect("(");
                Expr inner = formula();
                ts_.expect(")");
                return Expr::unary(*op, std::move(inner));
            }
            if (unsupported_op(word))
                throw ParseError("unsupported operator '" + word + "'", line);
            throw ParseError("unknown function '" + word + "'", line);
        }
        if (unsupported_op(word) || temporal_op(word))
            throw ParseError("unsupported operator '" + word + "'", line);
        ts_.next();
        if (word == "true")
            return Expr::make_const(true);
        if (word == "false")
            return Expr::make_const(false);
        if (word == "undef")
            return Expr::make_const(Undef{});
        if (word[0] == '$')
            throw ParseError("variable " + word + " used outside a location", line);
        return Expr::make_const(Symbol{word});
    }

    TokenStream& ts_;
};

bool temporal(const Expr& e)
{
    if (e.op == Op::AG || e.op == Op::AX || e.op == Op::EX || e.op == Op::EF || e.op == Op::Forall)
        return true;
    return std::any_of(e.args.begin(), e.args.end(), [](const Expr& a) { return temporal(a); });
}

Expr substitute(const Expr& e, const std::map<std::string, std::string>& bound,
                const std::map<Domain, std::vector<std::string>>& members)
{
    if (e.op == Op::Forall) {
        auto it = members.find(e.domain);
        std::vector<Expr> parts;
        if (it != members.end()) {
            for (const auto& m : it->second) {
                auto inner = bound;
                inner[e.var] = m;
                parts.push_back(substitute(e.args[0], inner, members));
            }
        }
        if (parts.empty())
            return Expr::make_const(true);
        Expr out = std::move(parts[0]);
        for (std::size_t i = 1; i < parts.size(); ++i)
            out = Expr::binary(Op::And, std::move(out), std::move(parts[i]));
        return out;
    }
    Expr out = e;
    if (e.op == Op::Read && !e.location.argument.empty() && e.location.argument[0] == '$') {
        auto it = bound.find(e.location.argument);
        if (it == bound.end())
            throw ParseError("unbound variable " + e.location.argument);
        out.location.argument = it->second;
    }
    for (auto& a : out.args)
        a = substitute(a, bound, members);
    return out;
}

void conjuncts(const Expr& e, std::vector<Expr>& out)
{
    if (e.op == Op::And && temporal(e)) {
        conjuncts(e.args[0], out);
        conjuncts(e.args[1], out);
    } else if (!(e.op == Op::Const && e.constant == Value{true})) {
        out.push_back(e);
    }
}

bool truthy(const Value& v)
{
    const auto* b = std::get_if<bool>(&v);
    return b && *b;
}

} // namespace

std::string to_string(const Expr& e)
{
    switch (e.op) {
    case Op::Const: return to_string(e.constant);
    case Op::Read: return e.location.name();
    case Op::Not:
    case Op::AG:
    case Op::AX:
    case Op::EX:
    case Op::EF: return std::string(op_text(e.op)) + "(" + to_string(e.args[0]) + ")";
    case Op::Forall:
        return "(forall " + e.var + " in " + std::string(domain_name(e.domain)) + " with " + to_string(e.args[0]) + ")";
    default: return "(" + to_string(e.args[0]) + " " + std::string(op_text(e.op)) + " " + to_string(e.args[1]) + ")";
    }
}

std::string_view to_string(PropertyForm f)
{
    switch (f) {
    case PropertyForm::AG: return "AG";
    case PropertyForm::AG_AX: return "AG-AX";
    case PropertyForm::AG_EX: return "AG-EX";
    case PropertyForm::AG_EF: return "AG-EF";
    }
    return "?";
}

Expr parse_formula(std::string_view text, int first_line)
{
    TokenStream ts(detail::tokenize(text, first_line));
    Parser p(ts);
    Expr e = p.formula();
    if (!ts.at_end())
        ts.fail("unexpected token after formula");
    return e;
}

std::vector<PropertyEntry> parse_property_file(std::string_view text)
{
    // Blank out `--` lines, remembering where named entries start.
    std::string body;
    std::vector<std::pair<int, std::string>> names;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line.compare(first, 2, "--") == 0) {
            std::string name = line.substr(first + 2);
            name.erase(0, name.find_first_not_of(" \t"));
            name.erase(name.find_last_not_of(" \t\r") + 1);
            names.emplace_back(lineno, name);
            body += '\n';
        } else {
            body += line + '\n';
        }
    }

    TokenStream ts(detail::tokenize(body));
    std::vector<PropertyEntry> entries;
    int unnamed = 0;
    std::size_t next_name = 0;
    while (!ts.at_end()) {
        const int at = ts.peek().line;
        if (!ts.accept("CTLSPEC"))
            ts.fail("expected CTLSPEC");
        bool named = false;
        while (next_name < names.size() && names[next_name].first < at) {
            entries.push_back(PropertyEntry{names[next_name].second, {}, names[next_name].first});
            ++next_name;
            named = true;
        }
        if (!named && (entries.empty() || names.empty()))
            entries.push_back(PropertyEntry{"property " + std::to_string(++unnamed), {}, at});
        Parser p(ts);
        entries.back().specs.push_back(p.formula());
    }
    for (; next_name < names.size(); ++next_name)
        entries.push_back(PropertyEntry{names[next_name].second, {}, names[next_name].first});
    if (entries.empty())
        throw ParseError("no CTLSPEC found");
    for (const auto& e : entries)
        if (e.specs.empty())
            throw ParseError("property '" + e.name + "' has no CTLSPEC", e.line);
    return entries;
}

std::vector<Formula> expand_over(const Expr& spec, const std::map<Domain, std::vector<std::string>>& members)
{
    std::vector<Expr> parts;
    conjuncts(substitute(spec, {}, members), parts);
    std::vector<Formula> out;
    for (auto& part : parts) {
        if (part.op != Op::AG)
            throw ParseError("unsupported property shape, expected ag(...): " + to_string(part));
        const Expr& body = part.args[0];
        Formula f;
        f.text = to_string(part);
        if (!temporal(body)) {
            f.form = PropertyForm::AG;
            f.p = body;
        } else if (body.op == Op::Implies && !temporal(body.args[0]) &&
                   (body.args[1].op == Op::AX || body.args[1].op == Op::EX || body.args[1].op == Op::EF) &&
                   !temporal(body.args[1].args[0])) {
            f.form = body.args[1].op == Op::AX   ? PropertyForm::AG_AX
                     : body.args[1].op == Op::EX ? PropertyForm::AG_EX
                                                 : PropertyForm::AG_EF;
            f.p = body.args[0];
            f.q = body.args[1].args[0];
        } else {
            throw ParseError("unsupported property shape: " + f.text);
        }
        out.push_back(std::move(f));
    }
    return out;
}

Value evaluate(const Expr& e, const WorldState& world, const Config& cfg)
{
    switch (e.op) {
    case Op::Const: return e.constant;
    case Op::Read:
        return location_available(world, e.location) ? read_location(world, e.location, cfg) : Value{Undef{}};
    case Op::Not: return !truthy(evaluate(e.args[0], world, cfg));
    case Op::And: return truthy(evaluate(e.args[0], world, cfg)) && truthy(evaluate(e.args[1], world, cfg));
    case Op::Or: return truthy(evaluate(e.args[0], world, cfg)) || truthy(evaluate(e.args[1], world, cfg));
    case Op::Implies: return !truthy(evaluate(e.args[0], world, cfg)) || truthy(evaluate(e.args[1], world, cfg));
    case Op::Eq: return values_equal(evaluate(e.args[0], world, cfg), evaluate(e.args[1], world, cfg));
    case Op::Ne: return !values_equal(evaluate(e.args[0], world, cfg), evaluate(e.args[1], world, cfg));
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: {
        auto a = as_number(evaluate(e.args[0], world, cfg));
        auto b = as_number(evaluate(e.args[1], world, cfg));
        if (!a || !b)
            return false;
        switch (e.op) {
        case Op::Lt: return *a < *b;
        case Op::Le: return *a <= *b;
        case Op::Gt: return *a > *b;
        default: return *a >= *b;
        }
    }
    case Op::Add: {
        const Value a = evaluate(e.args[0], world, cfg);
        const Value b = evaluate(e.args[1], world, cfg);
        const auto* ia = std::get_if<std::int64_t>(&a);
        const auto* ib = std::get_if<std::int64_t>(&b);
        if (ia && ib)
            return *ia + *ib;
        auto x = as_number(a);
        auto y = as_number(b);
        if (!x || !y)
            return Undef{};
        return *x + *y;
    }
    default: throw ContractViolation("evaluate: temporal operator in a state expression: " + to_string(e));
    }
}

bool holds(const Expr& e, const WorldState& world, const Config& cfg)
{
    return truthy(evaluate(e, world, cfg));
}

} // namespace celds
