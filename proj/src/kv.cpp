#include "edgetrade/kv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgetrade {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::string_view text) {
    std::map<std::string, std::string> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("line " + std::to_string(line_no) + ": empty key");
        if (!out.emplace(std::string(key), std::string(value)).second)
            throw std::invalid_argument("duplicate key '" + std::string(key) + "'");
    }
    return out;
}

std::map<std::string, std::string> load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

std::uint64_t parse_u64(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw std::invalid_argument("not an unsigned integer: '" + std::string(s) + "'");
    return v;
}

double parse_double(std::string_view s) {
    s = trim(s);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(std::string(s), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

std::vector<std::uint32_t> parse_u32_list(std::string_view s) {
    std::vector<std::uint32_t> out;
    while (true) {
        const auto comma = s.find(',');
        const auto v = parse_u64(s.substr(0, comma));
        if (v > UINT32_MAX) throw std::invalid_argument("value out of range");
        out.push_back(static_cast<std::uint32_t>(v));
        if (comma == std::string_view::npos) break;
        s = s.substr(comma + 1);
    }
    return out;
}

Rational parse_rational(std::string_view s) {
    s = trim(s);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    Rational r;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        const auto den = parse_u64(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        r = Rational(parse_u64(s.substr(0, slash)), den);
    } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
        const auto whole = s.substr(0, dot);
        const auto frac = s.substr(dot + 1);
        if (frac.empty() || frac.size() > 18) throw std::invalid_argument("bad decimal");
        boost::multiprecision::cpp_int scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        r = Rational(whole.empty() ? 0 : parse_u64(whole)) +
            Rational(boost::multiprecision::cpp_int(parse_u64(frac)), scale);
    } else {
        r = Rational(parse_u64(s));
    }
    return negative ? Rational(-r) : r;
}

std::string format_decimal(const Rational& r, unsigned digits) {
    using boost::multiprecision::cpp_int;
    cpp_int scale = 1;
    for (unsigned i = 0; i < digits; ++i) scale *= 10;
    const bool negative = r < 0;
    const Rational a = negative ? Rational(-r) : r;
    const cpp_int num = boost::multiprecision::numerator(a) * scale;
    const cpp_int den = boost::multiprecision::denominator(a);
    cpp_int q = num / den;
    if ((num % den) * 2 >= den) ++q;
    std::string whole = cpp_int(q / scale).str();
    std::string frac = cpp_int(q % scale).str();
    if (frac.size() < digits) frac.insert(0, digits - frac.size(), '0');
    std::string out = (negative && q != 0 ? "-" : "") + whole;
    if (digits > 0) out += "." + frac;
    return out;
}

}  // namespace edgetrade
