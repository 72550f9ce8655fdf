#include "adaptive_rd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <cstdio>

namespace adaptive_rd {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    double px_lo = 0.0;
    double px_hi = 1.0;

    double operator()(double v) const
    {
        const double span = hi - lo;
        const double t = span > 0.0 ? (v - lo) / span : 0.5;
        return px_lo + t * (px_hi - px_lo);
    }
};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string &s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

void header(std::ostringstream &o, const std::string &title)
{
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

void frame(std::ostringstream &o, const Axis &x, const Axis &y)
{
    o << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double vx = x.lo + (x.hi - x.lo) * t / 4.0;
        const double vy = y.lo + (y.hi - y.lo) * t / 4.0;
        o << "<text x=\"" << fmt(x(vx)) << "\" y=\"" << kHeight - kMargin + 15
          << "\" text-anchor=\"middle\">" << label(vx) << "</text>\n";
        o << "<text x=\"" << kMargin - 5 << "\" y=\"" << fmt(y(vy) + 4) << "\" text-anchor=\"end\">" << label(vy)
          << "</text>\n";
    }
}

void polyline(std::ostringstream &o, const std::vector<std::pair<double, double>> &pts, const char *colour,
              const char *extra = "")
{
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" " << extra << " points=\"";
    for (const auto &[px, py] : pts)
        o << fmt(px) << ',' << fmt(py) << ' ';
    o << "\"/>\n";
}

} // namespace

std::string curve_svg(const EffectCurve &curve, const std::string &title)
{
    std::ostringstream o;
    header(o, title);
    if (curve.points.empty()) {
        o << "</svg>\n";
        return o.str();
    }
    double ylo = 0.0, yhi = 0.0;
    for (const auto &p : curve.points) {
        ylo = std::min({ylo, p.ci_low, p.mu0, p.mu1});
        yhi = std::max({yhi, p.ci_high, p.mu0, p.mu1});
    }
    const Axis x{curve.points.front().r, curve.points.back().r, kMargin, kWidth - kMargin};
    const Axis y{ylo, yhi, kHeight - kMargin, kMargin};
    frame(o, x, y);

    o << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (const auto &p : curve.points)
        o << fmt(x(p.r)) << ',' << fmt(y(p.ci_high)) << ' ';
    for (auto it = curve.points.rbegin(); it != curve.points.rend(); ++it)
        o << fmt(x(it->r)) << ',' << fmt(y(it->ci_low)) << ' ';
    o << "\"/>\n";

    std::vector<std::pair<double, double>> beta, mu1, mu0;
    for (const auto &p : curve.points) {
        beta.emplace_back(x(p.r), y(p.beta_hat));
        mu1.emplace_back(x(p.r), y(p.mu1));
        mu0.emplace_back(x(p.r), y(p.mu0));
    }
    polyline(o, beta, "#08519c");
    polyline(o, mu1, "#d62728", "stroke-dasharray=\"4 3\"");
    polyline(o, mu0, "#2ca02c", "stroke-dasharray=\"4 3\"");
    o << "<line x1=\"" << fmt(x(0.0)) << "\" x2=\"" << fmt(x(0.0)) << "\" y1=\"" << kMargin << "\" y2=\""
      << kHeight - kMargin << "\" stroke=\"#888\" stroke-dasharray=\"2 2\"/>\n";
    o << "<text x=\"" << kWidth - kMargin << "\" y=\"" << kMargin - 8
      << "\" text-anchor=\"end\"><tspan fill=\"#08519c\">effect</tspan> <tspan fill=\"#d62728\">treated</tspan> "
         "<tspan fill=\"#2ca02c\">untreated</tspan></text>\n";
    o << "</svg>\n";
    return o.str();
}

std::string error_boxplot_svg(const ReplicationReport &report, const std::string &title)
{
    std::ostringstream o;
    header(o, title);
    double lo = 0.0, hi = 0.0;
    for (Method m : kMethods) {
        const auto &s = report[m];
        if (s.successes == 0)
            continue;
        lo = std::min(lo, s.error_quantiles.front());
        hi = std::max(hi, s.error_quantiles.back());
    }
    if (hi == lo)
        hi = lo + 1.0;
    const Axis x{0.0, static_cast<double>(kMethods.size()), kMargin, kWidth - kMargin};
    const Axis y{lo, hi, kHeight - kMargin, kMargin};
    o << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin
      << "\" height=\"" << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        o << "<text x=\"" << kMargin - 5 << "\" y=\"" << fmt(y(v) + 4) << "\" text-anchor=\"end\">" << label(v)
          << "</text>\n";
    }
    o << "<line x1=\"" << kMargin << "\" x2=\"" << kWidth - kMargin << "\" y1=\"" << fmt(y(0.0)) << "\" y2=\""
      << fmt(y(0.0)) << "\" stroke=\"#888\" stroke-dasharray=\"2 2\"/>\n";
    for (std::size_t i = 0; i < kMethods.size(); ++i) {
        const auto &s = report[kMethods[i]];
        const double cx = x(static_cast<double>(i) + 0.5);
        o << "<text x=\"" << fmt(cx) << "\" y=\"" << kHeight - kMargin + 15 << "\" text-anchor=\"middle\">"
          << to_string(kMethods[i]) << "</text>\n";
        if (s.successes == 0)
            continue;
        const auto &q = s.error_quantiles;
        const double half = 20.0;
        o << "<line x1=\"" << fmt(cx) << "\" x2=\"" << fmt(cx) << "\" y1=\"" << fmt(y(q[0])) << "\" y2=\""
          << fmt(y(q[4])) << "\" stroke=\"#333\"/>\n";
        o << "<rect x=\"" << fmt(cx - half) << "\" y=\"" << fmt(y(q[3])) << "\" width=\"" << 2 * half
          << "\" height=\"" << fmt(std::max(0.5, y(q[1]) - y(q[3]))) << "\" fill=\"#c6dbef\" stroke=\"#333\"/>\n";
        o << "<line x1=\"" << fmt(cx - half) << "\" x2=\"" << fmt(cx + half) << "\" y1=\"" << fmt(y(q[2]))
          << "\" y2=\"" << fmt(y(q[2])) << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    }
    o << "</svg>\n";
    return o.str();
}

} // namespace adaptive_rd
