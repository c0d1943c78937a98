#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "celds/domain.hpp"
#include "celds/signature.hpp"
#include "celds/value.hpp"

namespace celds {

/// Expression tree of the property language, before and after quantifier expansion.
struct Expr {
    enum class Op {
        Const,
        Read, // location; the argument may still be a `$variable`
        Not,
        And,
        Or,
        Implies,
        Eq,
        Ne,
        Lt,
        Le,
        Gt,
        Ge,
        Add,
        AG,
        AX,
        EX,
        EF,
        Forall, // var in domain with args[0]
    };

    Op op = Op::Const;
    Value constant;
    Location location;
    std::string var;
    Domain domain = Domain::Self;
    std::vector<Expr> args;

    static Expr make_const(Value v);
    static Expr make_read(Location loc);
    static Expr unary(Op op, Expr a);
    static Expr binary(Op op, Expr a, Expr b);
};

std::string to_string(const Expr& e);

/// The supported shapes: AG(p), AG(p -> AX q), AG(p -> EX q), AG(p -> EF q).
enum class PropertyForm { AG, AG_AX, AG_EX, AG_EF };

std::string_view to_string(PropertyForm f);

struct Formula {
    PropertyForm form = PropertyForm::AG;
    Expr p; // AG: the invariant itself
    Expr q; // unused for AG
    std::string text;
};

/// A named property: one or more CTLSPECs, still quantified. It holds iff all of them hold.
struct PropertyEntry {
    std::string name;
    std::vector<Expr> specs;
    int line = 0;
};

/// Parses one formula. Throws ParseError; unsupported temporal operators are named in the message.
Expr parse_formula(std::string_view text, int first_line = 1);

/// `-- name` lines open an entry; every `CTLSPEC <formula>` belongs to the latest entry.
/// Without names, each CTLSPEC is its own entry.
std::vector<PropertyEntry> parse_property_file(std::string_view text);

/// Replaces quantifiers by conjunctions over the members of each domain and splits the result into
/// supported forms. Throws ParseError for shapes outside the fragment.
std::vector<Formula> expand_over(const Expr& spec, const std::map<Domain, std::vector<std::string>>& members);

/// Value of a state expression in `world`. Reads of agents absent from the world give undef.
Value evaluate(const Expr& e, const WorldState& world, const Config& cfg);
bool holds(const Expr& e, const WorldState& world, const Config& cfg);

} // namespace celds
