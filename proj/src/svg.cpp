#include "avgspde/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "avgspde/statistics.hpp"

namespace avgspde::svg {
namespace {

constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

struct Axis {
  bool log = false;
  double lo = 0, hi = 1;
  double map(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (map(v) - lo) / (hi - lo); }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      // decades, plus 2x and 5x when fewer than three decades are visible
      const bool narrow = hi - lo < 2.0;
      for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0)
        for (double m : {1.0, 2.0, 5.0}) {
          if (m != 1.0 && !narrow) continue;
          const double v = m * std::pow(10.0, e);
          if (std::log10(v) >= lo - 1e-9 && std::log10(v) <= hi + 1e-9) t.push_back(v);
        }
      if (t.size() < 2) t = {std::pow(10.0, lo), std::pow(10.0, hi)};
      return t;
    }
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (m * mag >= raw) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::fabs(v) < 1e-12 * span ? 0.0 : v);
    return t;
  }
};

Axis make_axis(bool log, const std::vector<const std::vector<double>*>& data, const std::vector<double>& extra = {}) {
  Axis a;
  a.log = log;
  double lo = INFINITY, hi = -INFINITY;
  auto take = [&](double v) {
    if (!a.usable(v)) return;
    lo = std::min(lo, a.map(v));
    hi = std::max(hi, a.map(v));
  };
  for (const auto* d : data)
    for (double v : *d) take(v);
  for (double v : extra) take(v);
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::fabs(lo) * 0.1, log ? 0.5 : 1e-3);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

}  // namespace

std::string render(const Plot& p) {
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : p.series) {
    xs.push_back(&s.x);
    ys.push_back(&s.y);
  }
  const Axis ax = make_axis(p.logx, xs, p.vlines);
  const Axis ay = make_axis(p.logy, ys);
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double v) { return kLeft + ax.frac(v) * pw; };
  auto Y = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" + num(kH) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(kW / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(p.title) +
       "</text>\n";
  o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double x = X(t);
    o += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(x) + "\" y2=\"" + num(kTop + ph + 5) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 18) + "\" text-anchor=\"middle\">" + tick_label(t) +
         "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = Y(t);
    o += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
         "</text>\n";
  }
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kH - 12) + "\" text-anchor=\"middle\">" +
       escape(p.xlabel) + "</text>\n";
  o += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kTop + ph / 2) + ")\">" + escape(p.ylabel) + "</text>\n";
  for (double v : p.vlines) {
    if (!ax.usable(v)) continue;
    o += "<line x1=\"" + num(X(v)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(X(v)) + "\" y2=\"" + num(kTop + ph) +
         "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }

  double legend_y = kTop + 14;
  for (const auto& s : p.series) {
    std::string pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      const double x = X(s.x[i]), y = Y(s.y[i]);
      switch (s.style) {
        case Series::Style::Line:
          pts += (pts.empty() ? "" : " ") + num(x) + "," + num(y);
          break;
        case Series::Style::Circles:
          o += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3.5\" fill=\"none\" stroke=\"" + s.color +
               "\"/>\n";
          break;
        case Series::Style::Crosses:
          o += "<path d=\"M" + num(x - 3.5) + " " + num(y - 3.5) + "L" + num(x + 3.5) + " " + num(y + 3.5) + "M" +
               num(x - 3.5) + " " + num(y + 3.5) + "L" + num(x + 3.5) + " " + num(y - 3.5) + "\" stroke=\"" +
               s.color + "\"/>\n";
          break;
      }
    }
    if (!pts.empty())
      o += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    if (!s.label.empty()) {
      o += "<rect x=\"" + num(kLeft + pw - 170) + "\" y=\"" + num(legend_y - 8) + "\" width=\"12\" height=\"3\" fill=\"" +
           s.color + "\"/>\n";
      o += "<text x=\"" + num(kLeft + pw - 152) + "\" y=\"" + num(legend_y - 3) + "\">" + escape(s.label) +
           "</text>\n";
      legend_y += 16;
    }
  }
  o += "</svg>\n";
  return o;
}

std::string trajectory_plot(const Trajectory& tr, const std::string& title) {
  Plot p{title, "t", "mid value", false, false, {}, {}};
  p.series.push_back({"u(0,t)", tr.times, tr.u_mid, Series::Style::Line, "#1f77b4"});
  if (std::any_of(tr.v_mid.begin(), tr.v_mid.end(), [](double v) { return std::isfinite(v); }))
    p.series.push_back({"v(0,t)", tr.times, tr.v_mid, Series::Style::Line, "#ff7f0e"});
  return render(p);
}

std::string convergence_plot(const ConvergenceReport& r) {
  Plot p{"sup-error vs epsilon (slope " + tick_label(r.slope) + ")", "epsilon", "sup |u_eps - u|", true, true, {},
         {}};
  Series all{"replicas", {}, {}, Series::Style::Circles, "#aaaaaa"};
  for (const auto& row : r.rows) {
    all.x.push_back(row.epsilon);
    all.y.push_back(row.sup_error);
  }
  p.series.push_back(all);
  p.series.push_back({"median", r.epsilons, r.median_error, Series::Style::Crosses, "#d62728"});
  Series fit{"C eps^slope", r.epsilons, {}, Series::Style::Line, "#1f77b4"};
  for (double e : r.epsilons) fit.y.push_back(r.fitted_constant * std::pow(e, r.slope));
  p.series.push_back(fit);
  return render(p);
}

std::string bifurcation_plot(const BifurcationReport& r) {
  Plot p{"mid-value amplitude vs L (eps = " + tick_label(r.epsilon) + ")", "L", "|u(0)|", false, false, {},
         {r.threshold}};
  Series rms{"rms direct", {}, {}, Series::Style::Circles, "#1f77b4"};
  Series amp{"averaged steady", {}, {}, Series::Style::Line, "#d62728"};
  for (const auto& row : r.rows) {
    rms.x.push_back(row.L);
    rms.y.push_back(row.rms_direct);
    amp.x.push_back(row.L);
    amp.y.push_back(row.amp_averaged);
  }
  p.series = {rms, amp};
  return render(p);
}

std::string variance_plot(const ScalingReport& r) {
  Plot p{"variance of u(0,t) vs epsilon", "epsilon", "variance", true, true, {}, {}};
  Series d{"direct", {}, {}, Series::Style::Circles, "#1f77b4"};
  Series s{"surrogate", {}, {}, Series::Style::Crosses, "#d62728"};
  Series fd{"(c eps^b)^2 direct", {}, {}, Series::Style::Line, "#1f77b4"};
  Series fs{"(c eps^b)^2 surrogate", {}, {}, Series::Style::Line, "#d62728"};
  for (const auto& row : r.rows) {
    d.x.push_back(row.epsilon);
    d.y.push_back(row.var_direct);
    s.x.push_back(row.epsilon);
    s.y.push_back(row.var_surrogate);
  }
  if (!r.rows.empty()) {
    double lo = r.rows.front().epsilon, hi = lo;
    for (const auto& row : r.rows) lo = std::min(lo, row.epsilon), hi = std::max(hi, row.epsilon);
    for (int i = 0; i <= 20; ++i) {
      const double e = lo * std::pow(hi / lo, i / 20.0);
      fd.x.push_back(e);
      fs.x.push_back(e);
      fd.y.push_back(std::pow(r.c_direct * std::pow(e, r.beta_direct), 2));
      fs.y.push_back(std::pow(r.c_surrogate * std::pow(e, r.beta_surrogate), 2));
    }
  }
  p.series = {d, s, fd, fs};
  return render(p);
}

std::string mixing_plot(const MixingReport& r) {
  Plot p{"one-step contraction per mode", "mode", "factor", false, true, {}, {}};
  Series m{"measured", {}, {}, Series::Style::Circles, "#1f77b4"};
  Series e{"exact", {}, {}, Series::Style::Crosses, "#d62728"};
  Series b{"bound", {}, {}, Series::Style::Line, "#2ca02c"};
  for (const auto& row : r.rows) {
    const double k = static_cast<double>(row.mode);
    m.x.push_back(k), m.y.push_back(row.measured);
    e.x.push_back(k), e.y.push_back(row.exact);
    b.x.push_back(k), b.y.push_back(row.bound);
  }
  p.series = {m, e, b};
  return render(p);
}

std::string bench_plot(const BenchReport& r) {
  Plot p{"wall time vs epsilon", "epsilon", "seconds", true, true, {}, {}};
  Series d{"direct", {}, {}, Series::Style::Line, "#1f77b4"};
  Series s{"averaged + deviation", {}, {}, Series::Style::Line, "#d62728"};
  for (const auto& row : r.rows) {
    d.x.push_back(row.epsilon), d.y.push_back(row.t_direct_s);
    s.x.push_back(row.epsilon), s.y.push_back(row.t_surrogate_s);
  }
  p.series = {d, s};
  return render(p);
}

std::string gaussianity_plot(const GaussianityReport& r) {
  Plot p{"empirical CDF of mode-1 deviation at T", "z_1", "CDF", false, false, {}, {}};
  auto ecdf = [](std::vector<double> xs, std::string label, std::string color) {
    std::sort(xs.begin(), xs.end());
    Series s{std::move(label), xs, {}, Series::Style::Line, std::move(color)};
    for (std::size_t i = 0; i < xs.size(); ++i) s.y.push_back((i + 1.0) / static_cast<double>(xs.size()));
    return s;
  };
  p.series.push_back(ecdf(r.direct_samples, "z_eps", "#1f77b4"));
  p.series.push_back(ecdf(r.limit_samples, "z", "#d62728"));
  if (!r.rows.empty() && r.rows.front().oracle_variance > 0.0) {
    const double v = r.rows.front().oracle_variance, sd = std::sqrt(v);
    Series n{"N(0, v*)", {}, {}, Series::Style::Line, "#2ca02c"};
    for (int i = -40; i <= 40; ++i) {
      const double x = 4.0 * sd * i / 40.0;
      n.x.push_back(x);
      n.y.push_back(stats::normal_cdf(x, 0.0, v));
    }
    p.series.push_back(n);
  }
  return render(p);
}

}  // namespace avgspde::svg
