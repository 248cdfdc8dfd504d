#pragma once

// Output plumbing: run manifests, CSV rows and a minimal SVG bar chart.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace mtlab {

inline constexpr const char* kToolName = "mtlab";
inline constexpr const char* kToolVersion = "0.3.0";

using Json = nlohmann::ordered_json;

/// Parameters of one CLI invocation, embedded in every output. The worker
/// count is left out: it never changes results, and outputs must not differ
/// between worker counts.
struct RunManifest {
    std::string command;
    Json parameters = Json::object();
    std::vector<std::string> outputs;

    Json to_json() const
    {
        Json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["command"] = command;
        j["parameters"] = parameters;
        j["outputs"] = outputs;
        return j;
    }
};

inline std::string format_double(double x, int decimals = 6)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

/// Scientific form for p-values, which routinely underflow fixed notation.
inline std::string format_p(double p)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const RunManifest& manifest, std::vector<std::string> header)
    {
        text_ = "# " + manifest.to_json().dump() + "\n";
        row(header);
        width_ = header.size();
    }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) {
                text_ += ',';
            }
            text_ += escape(cells[i]);
        }
        text_ += '\n';
    }

    const std::string& str() const noexcept { return text_; }

  private:
    static std::string escape(const std::string& cell)
    {
        if (cell.find_first_of(",\"\n") == std::string::npos) {
            return cell;
        }
        std::string out = "\"";
        for (const char c : cell) {
            if (c == '"') {
                out += '"';
            }
            out += c;
        }
        return out + "\"";
    }

    std::string text_;
    std::size_t width_ = 0;
};

struct Bar {
    std::string label;
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct ReferenceLine {
    std::string label;
    double value = 0.0;
};

/// Vertical bars with error whiskers and dashed horizontal reference lines.
inline std::string svg_bar_chart(const std::string& title, const std::vector<Bar>& bars,
                                 const std::vector<ReferenceLine>& refs, const Json& manifest)
{
    const double width = 480, height = 320, left = 60, bottom = 40, top = 40;
    double ymax = 0.0;
    for (const auto& b : bars) {
        ymax = std::max({ymax, b.value, b.hi});
    }
    for (const auto& r : refs) {
        ymax = std::max(ymax, r.value);
    }
    ymax = ymax <= 0.0 ? 1.0 : ymax * 1.15;
    const double plot_h = height - bottom - top;
    auto y = [&](double v) { return height - bottom - plot_h * v / ymax; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_double(width, 0) + "\" height=\"" +
         format_double(height, 0) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<!-- " + manifest.dump() + " -->\n";
    s += "<text x=\"" + format_double(width / 2, 0) + "\" y=\"20\" text-anchor=\"middle\">" + title + "</text>\n";
    s += "<line x1=\"" + format_double(left, 0) + "\" y1=\"" + format_double(height - bottom, 1) + "\" x2=\"" +
         format_double(width - 20, 0) + "\" y2=\"" + format_double(height - bottom, 1) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + format_double(left, 0) + "\" y1=\"" + format_double(top, 0) + "\" x2=\"" +
         format_double(left, 0) + "\" y2=\"" + format_double(height - bottom, 1) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = ymax * t / 4.0;
        s += "<text x=\"" + format_double(left - 6, 0) + "\" y=\"" + format_double(y(v) + 4, 1) +
             "\" text-anchor=\"end\">" + format_double(v, 2) + "</text>\n";
    }
    const double slot = (width - left - 40) / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& b = bars[i];
        const double x0 = left + 20 + slot * static_cast<double>(i);
        const double bw = slot * 0.6;
        s += "<rect x=\"" + format_double(x0, 1) + "\" y=\"" + format_double(y(b.value), 1) + "\" width=\"" +
             format_double(bw, 1) + "\" height=\"" + format_double(height - bottom - y(b.value), 1) +
             "\" fill=\"steelblue\"/>\n";
        const double cx = x0 + bw / 2;
        s += "<line x1=\"" + format_double(cx, 1) + "\" y1=\"" + format_double(y(b.lo), 1) + "\" x2=\"" +
             format_double(cx, 1) + "\" y2=\"" + format_double(y(b.hi), 1) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + format_double(cx, 1) + "\" y=\"" + format_double(height - bottom + 16, 1) +
             "\" text-anchor=\"middle\">" + b.label + " (" + format_double(b.value, 4) + ")</text>\n";
    }
    for (const auto& r : refs) {
        s += "<line x1=\"" + format_double(left, 0) + "\" y1=\"" + format_double(y(r.value), 1) + "\" x2=\"" +
             format_double(width - 20, 0) + "\" y2=\"" + format_double(y(r.value), 1) +
             "\" stroke=\"firebrick\" stroke-dasharray=\"4 3\"/>\n";
        s += "<text x=\"" + format_double(width - 22, 0) + "\" y=\"" + format_double(y(r.value) - 4, 1) +
             "\" text-anchor=\"end\" fill=\"firebrick\">" + r.label + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace mtlab
