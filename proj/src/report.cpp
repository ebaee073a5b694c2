#include "fewscale/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "fewscale/curve_io.hpp"
#include "fewscale/errors.hpp"

namespace fewscale {
namespace {

template <typename... Args>
std::string printf_string(const char* fmt, Args... args) {
    char buf[256];
    const int n = std::snprintf(buf, sizeof(buf), fmt, args...);
    return std::string(buf, static_cast<std::size_t>(std::max(n, 0)));
}

char symbol(ScaleVariable v) { return v == ScaleVariable::DatasetSize ? 'N' : 'C'; }

} // namespace

nlohmann::json law_json(const PowerLaw& law) {
    nlohmann::json j;
    j["err_inf"] = law.err_inf;
    j["k"] = law.k;
    j["alpha"] = law.alpha;
    const auto n = normalize(law);
    j["scale"] = n.scale;
    return j;
}

nlohmann::json fit_json(const FitResult& fit) {
    nlohmann::json j;
    j["status"] = fit.status == FitStatus::Converged      ? "converged"
                  : fit.status == FitStatus::NotConverged ? "not_converged"
                                                          : "infeasible";
    j["converged"] = fit.converged;
    if (fit.status != FitStatus::Infeasible) {
        j["law"] = law_json(fit.law);
        j["cell"] = format_fit_cell(fit);
        j["sse"] = fit.sse;
        j["residuals"] = fit.residuals;
        j["iterations"] = fit.iterations;
    }
    if (!fit.note.empty()) j["note"] = fit.note;
    return j;
}

std::string format_law_cell(const NormalizedPowerLaw& law) {
    // Nearly flat fits (alpha ~ 0) can push the scale past double range.
    if (!std::isfinite(law.scale) || law.scale <= 0.0)
        return printf_string("%.2f + (%c/inf)^%.2f", law.err_inf, symbol(law.variable), law.alpha);
    int exponent = static_cast<int>(std::floor(std::log10(law.scale)));
    double mantissa = law.scale / std::pow(10.0, exponent);
    // Rounding can carry into the next decade (9.996e5 -> 10.00e5).
    if (std::round(mantissa * 100.0) >= 1000.0) {
        mantissa /= 10.0;
        ++exponent;
    } else if (std::round(mantissa * 100.0) < 100.0) {
        mantissa *= 10.0;
        --exponent;
    }
    return printf_string("%.2f + (%c/%.2fe%d)^%.2f", law.err_inf, symbol(law.variable), mantissa,
                         exponent, law.alpha);
}

std::string format_fit_cell(const FitResult& fit) {
    if (fit.status == FitStatus::Infeasible || !fit.converged) return std::string(kInfeasibleCell);
    return format_law_cell(normalize(fit.law));
}

NormalizedPowerLaw parse_law_cell(std::string_view cell) {
    static const std::regex re(
        R"(^\s*([0-9]+(?:\.[0-9]*)?) \+ \(([NC])/([0-9]+(?:\.[0-9]*)?)e(-?[0-9]+)\)\^(-?[0-9]+(?:\.[0-9]*)?)\s*$)");
    std::cmatch m;
    if (!std::regex_match(cell.data(), cell.data() + cell.size(), m, re))
        throw ParseError("not a power-law cell: '" + std::string(cell) + "'");
    NormalizedPowerLaw law;
    law.err_inf = std::stod(m[1].str());
    law.variable = m[2].str() == "N" ? ScaleVariable::DatasetSize : ScaleVariable::ClassCount;
    law.scale = std::stod(m[3].str()) * std::pow(10.0, std::stoi(m[4].str()));
    law.alpha = std::stod(m[5].str());
    return law;
}

std::string emit_table(const std::vector<TableEntry>& entries) {
    std::vector<Method> columns;
    for (Method m : kAllMethods) {
        const bool present = std::any_of(entries.begin(), entries.end(),
                                         [m](const TableEntry& e) { return e.method == m; });
        if (present || entries.empty()) columns.push_back(m);
    }
    std::vector<std::string> models;
    for (const auto& e : entries)
        if (std::find(models.begin(), models.end(), e.model) == models.end()) models.push_back(e.model);

    const char sym = entries.empty() ? 'N' : symbol(entries.front().fit.law.variable);
    std::string out = "| Model |";
    for (Method m : columns) out += printf_string(" %s Err(%c) |", std::string(display_name(m)).c_str(), sym);
    out += "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
    out += "\n";
    for (const auto& model : models) {
        out += "| " + model + " |";
        for (Method m : columns) {
            auto it = std::find_if(entries.begin(), entries.end(), [&](const TableEntry& e) {
                return e.model == model && e.method == m;
            });
            out += " " + (it == entries.end() ? std::string("-") : format_fit_cell(it->fit)) + " |";
        }
        out += "\n";
    }
    return out;
}

PlotFiles render_plot(const ScalingCurve& curve, const std::optional<FitResult>& fit) {
    const auto& pts = curve.points();
    if (pts.empty()) throw ValidationError("cannot plot an empty curve");

    const bool draw_fit = fit && fit->status != FitStatus::Infeasible;
    std::vector<CurvePoint> fitted;
    const double x_lo = pts.front().value;
    const double x_hi = pts.back().value;
    if (draw_fit) {
        const double l0 = std::log10(x_lo);
        const double l1 = std::log10(x_hi);
        for (std::size_t i = 0; i < kFitSamples; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(kFitSamples - 1);
            const double x = i + 1 == kFitSamples ? x_hi : std::pow(10.0, l0 + (l1 - l0) * t);
            fitted.push_back({x, predict_error(fit->law, x)});
        }
    }

    // Log-scaled bounds, padded by 5% of the span on each side.
    double ymin = pts.front().error_percent, ymax = ymin;
    for (const auto& p : pts) ymin = std::min(ymin, p.error_percent), ymax = std::max(ymax, p.error_percent);
    for (const auto& p : fitted) ymin = std::min(ymin, p.error_percent), ymax = std::max(ymax, p.error_percent);
    ymin = std::max(ymin, 1e-6);
    ymax = std::max(ymax, ymin);
    auto padded = [](double lo, double hi) {
        double a = std::log10(lo), b = std::log10(hi);
        if (b - a < 1e-9) a -= 0.5, b += 0.5;
        const double pad = 0.05 * (b - a);
        return std::pair{a - pad, b + pad};
    };
    const auto [lx0, lx1] = padded(x_lo, x_hi);
    const auto [ly0, ly1] = padded(ymin, ymax);

    constexpr double W = 640, H = 480, L = 70, R = 20, T = 30, B = 60;
    auto px = [&](double x) { return L + (std::log10(x) - lx0) / (lx1 - lx0) * (W - L - R); };
    auto py = [&](double y) {
        return H - B - (std::log10(std::max(y, 1e-6)) - ly0) / (ly1 - ly0) * (H - T - B);
    };

    std::string svg;
    svg += printf_string("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                         "viewBox=\"0 0 %.0f %.0f\">\n", W, H, W, H);
    svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += printf_string("<line class=\"axis\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n",
                         L, H - B, W - R, H - B);
    svg += printf_string("<line class=\"axis\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n",
                         L, T, L, H - B);
    for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d) {
        const double x = px(std::pow(10.0, d));
        svg += printf_string("<line class=\"tick\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n",
                             x, H - B, x, H - B + 5);
        svg += printf_string("<text x=\"%.3f\" y=\"%.3f\" font-size=\"12\" text-anchor=\"middle\">1e%d</text>\n",
                             x, H - B + 20, d);
    }
    for (int i = 0; i <= 4; ++i) {
        const double ly = ly0 + (ly1 - ly0) * i / 4.0;
        const double y = py(std::pow(10.0, ly));
        svg += printf_string("<line class=\"tick\" x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n",
                             L - 5, y, L, y);
        svg += printf_string("<text x=\"%.3f\" y=\"%.3f\" font-size=\"12\" text-anchor=\"end\">%.3g</text>\n",
                             L - 8, y + 4, std::pow(10.0, ly));
    }
    const char* xname = curve.variable() == ScaleVariable::DatasetSize ? "training set size N"
                                                                        : "training class count C";
    svg += printf_string("<text x=\"%.3f\" y=\"%.3f\" font-size=\"14\" text-anchor=\"middle\">%s</text>\n",
                         (L + W - R) / 2, H - 15, xname);
    svg += printf_string("<text x=\"15\" y=\"%.3f\" font-size=\"14\" text-anchor=\"middle\" "
                         "transform=\"rotate(-90 15 %.3f)\">error rate (%%)</text>\n",
                         (T + H - B) / 2, (T + H - B) / 2);
    if (!curve.label().empty()) {
        std::string title;
        for (char c : curve.label()) {
            if (c == '<') title += "&lt;";
            else if (c == '>') title += "&gt;";
            else if (c == '&') title += "&amp;";
            else title += c;
        }
        svg += printf_string("<text x=\"%.3f\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">",
                             (L + W - R) / 2) + title + "</text>\n";
    }
    if (draw_fit) {
        svg += "<path class=\"fit\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" d=\"";
        for (std::size_t i = 0; i < fitted.size(); ++i)
            svg += printf_string("%s%.3f %.3f", i == 0 ? "M" : " L", px(fitted[i].value), py(fitted[i].error_percent));
        svg += "\"/>\n";
    }
    for (const auto& p : pts)
        svg += printf_string("<circle class=\"point\" cx=\"%.3f\" cy=\"%.3f\" r=\"4\" fill=\"darkred\"/>\n",
                             px(p.value), py(p.error_percent));
    svg += "</svg>\n";

    std::string csv = "series,value,error_percent\n";
    for (const auto& p : pts) csv += "data," + format_double(p.value) + "," + format_double(p.error_percent) + "\n";
    for (const auto& p : fitted) csv += "fit," + format_double(p.value) + "," + format_double(p.error_percent) + "\n";
    return {std::move(svg), std::move(csv)};
}

void emit_plot(const ScalingCurve& curve, const std::optional<FitResult>& fit,
               const std::filesystem::path& path) {
    const auto files = render_plot(curve, fit);
    write_text_file(path, files.svg);
    auto sidecar = path;
    sidecar.replace_extension(".csv");
    write_text_file(sidecar, files.sidecar_csv);
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fewscale
