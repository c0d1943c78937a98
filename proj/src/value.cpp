#include "celds/value.hpp"

#include <charconv>
#include <cmath>

namespace celds {

namespace {

std::string format_real(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos)
        s += ".0";
    return s;
}

} // namespace

std::string to_string(const Value& v)
{
    struct Visitor {
        std::string operator()(Undef) const { return "undef"; }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_real(d); }
        std::string operator()(const Symbol& s) const { return s.name; }
        std::string operator()(const NodeMetrics& m) const
        {
            return "[(\"Latency\", " + std::to_string(m.latency) + "), (\"CPU Usage\", " + format_real(m.cpu_usage) +
                   "), (\"Storage Usage\", " + format_real(m.storage_usage) + "), (\"Memory Usage\", " +
                   format_real(m.memory_usage) + "), (\"Bandwidth\", " + format_real(m.bandwidth) + ")]";
        }
        std::string operator()(const IdList& l) const
        {
            std::string out = "[";
            for (std::size_t i = 0; i < l.size(); ++i)
                out += (i ? ", " : "") + l[i];
            return out + "]";
        }
    };
    return std::visit(Visitor{}, v);
}

std::optional<double> as_number(const Value& v)
{
    if (const auto* i = std::get_if<std::int64_t>(&v))
        return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v))
        return *d;
    return std::nullopt;
}

bool values_equal(const Value& a, const Value& b)
{
    if (a.index() != b.index()) {
        auto x = as_number(a);
        auto y = as_number(b);
        return x && y && *x == *y;
    }
    return a == b;
}

} // namespace celds
