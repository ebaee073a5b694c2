#include "fewscale/curve_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fewscale/errors.hpp"

namespace fewscale {
namespace {

std::string_view trim(std::string_view s) {
    const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r'; };
    while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
    return s;
}

bool parse_number(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

ScalingCurve parse_curve_csv(std::string_view text, ScaleVariable variable, std::string label) {
    std::vector<CurvePoint> points;
    std::map<double, std::size_t> seen; // value -> line
    std::size_t line_no = 0;
    bool header = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (!header) {
            if (line != "value,error_percent")
                throw ParseError("line " + std::to_string(line_no) +
                                 ": expected header 'value,error_percent'");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        CurvePoint p;
        if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos ||
            !parse_number(line.substr(0, comma), p.value) ||
            !parse_number(line.substr(comma + 1), p.error_percent)) {
            throw ParseError("line " + std::to_string(line_no) + ": malformed row '" +
                             std::string(line) + "'");
        }
        if (!(p.value > 0.0))
            throw ValidationError("line " + std::to_string(line_no) + ": value must be positive");
        if (!(p.error_percent >= 0.0 && p.error_percent <= 100.0))
            throw ValidationError("line " + std::to_string(line_no) + ": error_percent outside [0, 100]");
        if (auto [it, inserted] = seen.emplace(p.value, line_no); !inserted)
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate value " +
                                  format_double(p.value) + " (first on line " +
                                  std::to_string(it->second) + ")");
        points.push_back(p);
    }
    if (!header) throw ParseError("line 1: missing header 'value,error_percent'");
    return ScalingCurve(variable, std::move(points), std::move(label));
}

ScalingCurve ingest_curve_csv(const std::filesystem::path& path, ScaleVariable variable) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_curve_csv(ss.str(), variable, path.stem().string());
}

std::string format_curve_csv(const ScalingCurve& curve) {
    std::string out = "value,error_percent\n";
    for (const auto& p : curve.points())
        out += format_double(p.value) + "," + format_double(p.error_percent) + "\n";
    return out;
}

} // namespace fewscale
