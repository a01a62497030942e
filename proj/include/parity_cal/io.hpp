#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "parity_cal/decision.hpp"
#include "parity_cal/distributions.hpp"
#include "parity_cal/errors.hpp"
#include "parity_cal/metrics.hpp"
#include "parity_cal/synthetic.hpp"

namespace parity_cal::io {

// Forecast CSV: "t,y" followed by one encoding-specific column block.
//   gaussian   t,y,mu,sigma
//   quantiles  t,y,q_<level>,...        (levels strictly increasing)
//   direct     t,y,p
//   mixture    t,y,w_1,mu_1,sigma_1,lo_1,hi_1,w_2,...   (truncated normals)
enum class ForecastEncoding { Gaussian, Quantiles, Direct, Mixture };

inline std::string_view to_string(ForecastEncoding e) {
    switch (e) {
        case ForecastEncoding::Gaussian: return "gaussian";
        case ForecastEncoding::Quantiles: return "quantiles";
        case ForecastEncoding::Direct: return "direct";
        case ForecastEncoding::Mixture: return "mixture";
    }
    return "?";
}

struct ForecastTable {
    ForecastEncoding encoding = ForecastEncoding::Gaussian;
    std::vector<double> levels;       // quantiles encoding only
    std::size_t mixture_components = 0;
    std::vector<std::int64_t> t;
    std::vector<double> y;
    std::vector<ForecastDistribution> forecasts;
};

/// 17 significant digits, so that parsing the text restores the double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Shortest text that parses back to the same double (used for header labels).
inline std::string format_shortest(double x) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError("cannot parse number '" + std::string(s) + "'", line);
    return v;
}

inline std::int64_t parse_int(std::string_view s, std::size_t line) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ParseError("cannot parse integer '" + std::string(s) + "'", line);
    return v;
}

namespace detail {

inline void require(bool ok, const std::string& what, std::size_t line) {
    if (!ok) throw ParseError(what, line);
}

inline ForecastTable parse_forecast_header(const std::vector<std::string_view>& cols) {
    ForecastTable tab;
    require(cols.size() >= 3 && cols[0] == "t" && cols[1] == "y", "header must start with t,y", 1);
    const std::size_t extra = cols.size() - 2;
    if (extra == 2 && cols[2] == "mu" && cols[3] == "sigma") {
        tab.encoding = ForecastEncoding::Gaussian;
    } else if (extra == 1 && cols[2] == "p") {
        tab.encoding = ForecastEncoding::Direct;
    } else if (cols[2].starts_with("q_")) {
        tab.encoding = ForecastEncoding::Quantiles;
        for (std::size_t i = 2; i < cols.size(); ++i) {
            require(cols[i].starts_with("q_"), "mixed quantile and non-quantile columns", 1);
            const double level = parse_double(cols[i].substr(2), 1);
            require(level > 0.0 && level < 1.0, "quantile level outside (0, 1)", 1);
            require(tab.levels.empty() || level > tab.levels.back(), "quantile columns must be ordered by level", 1);
            tab.levels.push_back(level);
        }
        require(tab.levels.size() >= 2, "need at least two quantile columns", 1);
    } else if (extra % 5 == 0) {
        tab.encoding = ForecastEncoding::Mixture;
        tab.mixture_components = extra / 5;
        static constexpr std::string_view names[] = {"w_", "mu_", "sigma_", "lo_", "hi_"};
        for (std::size_t k = 0; k < tab.mixture_components; ++k)
            for (std::size_t j = 0; j < 5; ++j)
                require(cols[2 + 5 * k + j] == std::string(names[j]) + std::to_string(k + 1),
                        "unrecognized forecast header", 1);
    } else {
        throw ParseError("unrecognized forecast header", 1);
    }
    return tab;
}

inline ForecastDistribution parse_forecast_fields(const ForecastTable& tab, const std::vector<std::string_view>& f,
                                                  std::size_t line) {
    switch (tab.encoding) {
        case ForecastEncoding::Gaussian:
            return Gaussian(parse_double(f[2], line), parse_double(f[3], line));
        case ForecastEncoding::Direct:
            return DirectProbability(parse_double(f[2], line));
        case ForecastEncoding::Quantiles: {
            std::vector<double> values;
            for (std::size_t i = 2; i < f.size(); ++i) values.push_back(parse_double(f[i], line));
            return QuantileSet(tab.levels, std::move(values));
        }
        case ForecastEncoding::Mixture: {
            std::vector<double> w;
            std::vector<TruncatedGaussian> comps;
            for (std::size_t k = 0; k < tab.mixture_components; ++k) {
                const std::size_t b = 2 + 5 * k;
                w.push_back(parse_double(f[b], line));
                comps.emplace_back(parse_double(f[b + 1], line), parse_double(f[b + 2], line),
                                   parse_double(f[b + 3], line), parse_double(f[b + 4], line));
            }
            return TruncatedGaussianMixture(std::move(w), std::move(comps));
        }
    }
    throw ParseError("unknown encoding", line);
}

}  // namespace detail

/// Reads a forecast CSV. Malformed text raises ParseError (with the line
/// number); rows that parse but break an invariant raise ValidationError.
inline ForecastTable read_forecasts(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("empty forecast file", 1);
    ++lineno;
    ForecastTable tab = detail::parse_forecast_header(split_csv(line));
    const std::size_t width = split_csv(line).size();

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        detail::require(f.size() == width,
                        "expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()), lineno);
        const std::int64_t t = parse_int(f[0], lineno);
        const double y = parse_double(f[1], lineno);
        if (!std::isfinite(y)) throw ValidationError("line " + std::to_string(lineno) + ": y must be finite");
        if (!tab.t.empty() && t <= tab.t.back())
            throw ValidationError("line " + std::to_string(lineno) + ": t must be strictly increasing");
        try {
            tab.forecasts.push_back(detail::parse_forecast_fields(tab, f, lineno));
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
        tab.t.push_back(t);
        tab.y.push_back(y);
    }
    if (tab.y.size() < 2) throw ValidationError("forecast file needs at least two rows");
    return tab;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    return out;
}

inline ForecastTable ingest(const std::string& path) {
    auto in = open_input(path);
    return read_forecasts(in);
}

inline void write_forecasts(std::ostream& out, const ForecastTable& tab) {
    out << "t,y";
    switch (tab.encoding) {
        case ForecastEncoding::Gaussian: out << ",mu,sigma"; break;
        case ForecastEncoding::Direct: out << ",p"; break;
        case ForecastEncoding::Quantiles:
            for (double l : tab.levels) out << ",q_" << format_shortest(l);
            break;
        case ForecastEncoding::Mixture:
            for (std::size_t k = 1; k <= tab.mixture_components; ++k)
                out << ",w_" << k << ",mu_" << k << ",sigma_" << k << ",lo_" << k << ",hi_" << k;
            break;
    }
    out << '\n';
    for (std::size_t i = 0; i < tab.y.size(); ++i) {
        out << tab.t[i] << ',' << format_double(tab.y[i]);
        std::visit(
            [&](const auto& d) {
                using T = std::decay_t<decltype(d)>;
                if constexpr (std::is_same_v<T, Gaussian>) {
                    if (tab.encoding != ForecastEncoding::Gaussian) throw ValidationError("row encoding differs from table");
                    out << ',' << format_double(d.mu()) << ',' << format_double(d.sigma());
                } else if constexpr (std::is_same_v<T, DirectProbability>) {
                    if (tab.encoding != ForecastEncoding::Direct) throw ValidationError("row encoding differs from table");
                    out << ',' << format_double(d.p());
                } else if constexpr (std::is_same_v<T, QuantileSet>) {
                    if (tab.encoding != ForecastEncoding::Quantiles || d.levels() != tab.levels)
                        throw ValidationError("row encoding differs from table");
                    for (double v : d.values()) out << ',' << format_double(v);
                } else {
                    if (tab.encoding != ForecastEncoding::Mixture || d.components().size() != tab.mixture_components)
                        throw ValidationError("row encoding differs from table");
                    for (std::size_t k = 0; k < d.components().size(); ++k) {
                        const auto& c = d.components()[k];
                        out << ',' << format_double(d.weights()[k]) << ',' << format_double(c.mu()) << ','
                            << format_double(c.sigma()) << ',' << format_double(c.lower()) << ','
                            << format_double(c.upper());
                    }
                }
            },
            tab.forecasts[i]);
        out << '\n';
    }
}

inline ForecastTable synthetic_table(const SyntheticStream& s) {
    ForecastTable tab;
    tab.encoding = ForecastEncoding::Mixture;
    tab.mixture_components = 2;
    tab.y = s.outcomes;
    tab.forecasts = s.forecasts;
    tab.t.reserve(s.outcomes.size());
    for (std::size_t i = 0; i < s.outcomes.size(); ++i) tab.t.push_back(static_cast<std::int64_t>(i + 1));
    return tab;
}

// Records CSV: t,p_raw,p_cal,outcome
inline void write_records(std::ostream& out, std::span<const ParityRecord> records) {
    out << "t,p_raw,p_cal,outcome\n";
    for (const auto& r : records)
        out << r.t << ',' << format_double(r.p_raw) << ',' << format_double(r.p_cal) << ',' << r.outcome << '\n';
}

inline std::vector<ParityRecord> read_records(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw ParseError("empty records file", 1);
    const auto header = split_csv(line);
    detail::require(header.size() == 4 && header[0] == "t" && header[1] == "p_raw" && header[2] == "p_cal" &&
                        header[3] == "outcome",
                    "records header must be t,p_raw,p_cal,outcome", 1);
    std::vector<ParityRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        detail::require(f.size() == 4, "expected 4 fields", lineno);
        ParityRecord r{parse_int(f[0], lineno), parse_double(f[1], lineno), parse_double(f[2], lineno),
                       static_cast<int>(parse_int(f[3], lineno))};
        try {
            validate_record(r);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!out.empty() && r.t <= out.back().t)
            throw ValidationError("line " + std::to_string(lineno) + ": t must be strictly increasing");
        out.push_back(r);
    }
    if (out.empty()) throw ValidationError("records file has no rows");
    return out;
}

// Diagram CSV: bin_lo,bin_hi,pred_avg,obs_avg,count. Empty bins leave the
// two averages blank.
inline void write_diagram(std::ostream& out, const ReliabilityDiagram& d) {
    out << "bin_lo,bin_hi,pred_avg,obs_avg,count\n";
    for (const auto& b : d.bins) {
        out << format_double(b.lo) << ',' << format_double(b.hi) << ',';
        if (!b.empty()) out << format_double(b.pred_avg) << ',' << format_double(b.obs_avg);
        else out << ',';
        out << ',' << b.count << '\n';
    }
}

/// Loss matrix as two CSV rows of three numbers (increase, then decrease;
/// columns tight, mild, none) or JSON: [[...],[...]] or {"loss": [[...],[...]]}.
inline LossMatrix read_loss_matrix(std::istream& in) {
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) throw ParseError("empty loss matrix file", 1);
    LossMatrix::Table tab{};
    if (text[first] == '[' || text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("loss matrix JSON: ") + e.what());
        }
        if (j.is_object()) {
            if (!j.contains("loss")) throw ParseError("loss matrix JSON needs a \"loss\" key");
            j = j["loss"];
        }
        if (!j.is_array() || j.size() != 2) throw ParseError("loss matrix must have 2 rows");
        for (std::size_t r = 0; r < 2; ++r) {
            if (!j[r].is_array() || j[r].size() != 3) throw ParseError("loss matrix rows must have 3 entries");
            for (std::size_t c = 0; c < 3; ++c) {
                if (!j[r][c].is_number()) throw ParseError("loss matrix entries must be numbers");
                tab[r][c] = j[r][c].get<double>();
            }
        }
        return LossMatrix(tab);
    }
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0, row = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        detail::require(row < 2, "loss matrix must have 2 rows", lineno);
        const auto f = split_csv(line);
        detail::require(f.size() == 3, "loss matrix rows must have 3 entries", lineno);
        for (std::size_t c = 0; c < 3; ++c) tab[row][c] = parse_double(f[c], lineno);
        ++row;
    }
    detail::require(row == 2, "loss matrix must have 2 rows", lineno);
    return LossMatrix(tab);
}

inline nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json j;
    j["qce"] = r.qce ? nlohmann::json(*r.qce) : nlohmann::json(nullptr);
    j["pce"] = r.pce;
    j["sharp"] = r.sharp;
    j["acc"] = r.acc;
    j["auroc"] = r.auroc ? nlohmann::json(*r.auroc) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const PolicyResult& r, bool include_actions = true) {
    nlohmann::json j;
    j["cumulative_loss"] = r.cumulative_loss;
    j["action_counts"] = {{"tight", r.action_counts[0]}, {"mild", r.action_counts[1]}, {"none", r.action_counts[2]}};
    j["ties"] = r.ties;
    if (include_actions) {
        auto& acts = j["actions"] = nlohmann::json::array();
        for (auto a : r.actions) acts.push_back(std::string(to_string(a)));
    }
    return j;
}

/// Static SVG reliability plot: predicted vs observed with the diagonal,
/// and bin occupancy bars for parity diagrams.
inline void write_reliability_svg(std::ostream& out, const ReliabilityDiagram& d, std::string_view title) {
    constexpr double size = 400.0, margin = 50.0, plot = size - 2 * margin;
    auto px = [&](double v) { return margin + v * plot; };
    auto py = [&](double v) { return size - margin - v * plot; };
    char buf[256];

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << size / 2 << "\" y=\"25\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    if (d.kind == ReliabilityDiagram::Kind::Parity && d.total > 0) {
        std::int64_t peak = 1;
        for (const auto& b : d.bins) peak = std::max(peak, b.count);
        for (const auto& b : d.bins) {
            if (b.empty()) continue;
            const double h = static_cast<double>(b.count) / static_cast<double>(peak) * plot;
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#9ecae1\" opacity=\"0.5\"/>\n",
                          px(b.lo), py(0) - h, px(b.hi) - px(b.lo), h);
            out << buf;
        }
    }
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
                  margin, margin, plot, plot);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"gray\" stroke-dasharray=\"4,4\"/>\n",
                  px(0), py(0), px(1), py(1));
    out << buf;
    out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"";
    for (const auto& b : d.bins) {
        if (b.empty()) continue;
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(b.pred_avg), py(b.obs_avg));
        out << buf;
    }
    out << "\"/>\n";
    const char* xlabel = d.kind == ReliabilityDiagram::Kind::Parity ? "predicted probability" : "quantile level";
    out << "<text x=\"" << size / 2 << "\" y=\"" << size - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel << "</text>\n";
    out << "<text x=\"15\" y=\"" << size / 2 << "\" transform=\"rotate(-90 15 " << size / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">observed frequency</text>\n";
    out << "</svg>\n";
}

}  // namespace parity_cal::io
