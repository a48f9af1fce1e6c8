#include "kochlab/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "kochlab/error.hpp"
#include "kochlab/report_io.hpp"
#include "kochlab/stats.hpp"

namespace kochlab {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double x, const char* spec = "%.4g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Maps data ranges onto the plot area and collects SVG elements.
class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (x1_ <= x0_) x1_ = x0_ + 1;
    if (y1_ <= y0_) y1_ = y0_ + 1;
  }
  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  void add(const std::string& element) { body_ += element + "\n"; }
  void line(double xa, double ya, double xb, double yb, const std::string& style) {
    add("<line x1=\"" + fmt(px(xa), "%.2f") + "\" y1=\"" + fmt(py(ya), "%.2f") + "\" x2=\"" +
        fmt(px(xb), "%.2f") + "\" y2=\"" + fmt(py(yb), "%.2f") + "\" " + style + "/>");
  }
  void dot(double x, double y) {
    add("<circle cx=\"" + fmt(px(x), "%.2f") + "\" cy=\"" + fmt(py(y), "%.2f") +
        "\" r=\"2\" fill=\"#1f4e8c\"/>");
  }
  void rect(double xa, double ya, double xb, double yb, const std::string& fill) {
    double l = px(xa), r = px(xb), t = py(yb), b = py(ya);
    add("<rect x=\"" + fmt(l, "%.2f") + "\" y=\"" + fmt(t, "%.2f") + "\" width=\"" + fmt(r - l, "%.2f") +
        "\" height=\"" + fmt(b - t, "%.2f") + "\" fill=\"" + fill + "\"/>");
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "middle", int size = 12) {
    add("<text x=\"" + fmt(x, "%.2f") + "\" y=\"" + fmt(y, "%.2f") + "\" font-size=\"" + std::to_string(size) +
        "\" text-anchor=\"" + anchor + "\" font-family=\"sans-serif\">" + escape(s) + "</text>");
  }

  // Axes with five ticks; `label` converts a data coordinate into tick text.
  template <class XLabel, class YLabel>
  void axes(const std::string& xlabel, const std::string& ylabel, XLabel xl, YLabel yl) {
    const double bx = kHeight - kBottom, lx = kLeft;
    add("<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(bx) + "\" x2=\"" + fmt(kWidth - kRight) + "\" y2=\"" + fmt(bx) +
        "\" stroke=\"black\"/>");
    add("<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(lx) + "\" y2=\"" + fmt(bx) +
        "\" stroke=\"black\"/>");
    for (int i = 0; i <= 4; ++i) {
      double xv = x0_ + (x1_ - x0_) * i / 4, yv = y0_ + (y1_ - y0_) * i / 4;
      text(px(xv), bx + 16, xl(xv), "middle", 10);
      text(lx - 6, py(yv) + 4, yl(yv), "end", 10);
    }
    text((kLeft + kWidth - kRight) / 2, kHeight - 12, xlabel);
    add("<text x=\"16\" y=\"" + fmt((kTop + bx) / 2, "%.2f") + "\" font-size=\"12\" text-anchor=\"middle\" "
        "font-family=\"sans-serif\" transform=\"rotate(-90 16 " + fmt((kTop + bx) / 2, "%.2f") + ")\">" +
        escape(ylabel) + "</text>");
  }

  std::string finish(const std::string& title) {
    std::string head = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
                       fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    head += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    head += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\" "
            "font-family=\"sans-serif\">" + escape(title) + "</text>\n";
    return head + body_ + "</svg>\n";
  }

 private:
  double x0_, x1_, y0_, y1_;
  std::string body_;
};

auto plain = [](double v) { return fmt(v); };
auto power = [](double v) { return "1e" + fmt(v, "%.2g"); };

void require_values(const std::vector<double>& v, const char* what) {
  if (v.empty()) raise(ErrorCode::kMalformedInput, std::string("no values to plot for ") + what);
  for (double x : v) {
    if (!std::isfinite(x)) raise(ErrorCode::kMalformedInput, std::string("non-finite value in ") + what);
  }
}

}  // namespace

std::string svg_histogram(const std::vector<double>& values, const std::string& title, int bins) {
  require_values(values, "histogram");
  if (bins < 1) raise(ErrorCode::kDomain, "histogram needs at least one bin");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) hi = lo + 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) counts[std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins))]++;
  std::size_t top = *std::max_element(counts.begin(), counts.end());
  Canvas c(lo, hi, 0, static_cast<double>(top));
  for (int b = 0; b < bins; ++b) {
    double a = lo + (hi - lo) * b / bins, e = lo + (hi - lo) * (b + 1) / bins;
    c.rect(a, 0, e, static_cast<double>(counts[b]), "#7fa7d9");
  }
  c.axes("value", "count", plain, plain);
  return c.finish(title);
}

std::string svg_qq(const std::vector<double>& values, double variance, const std::string& title) {
  require_values(values, "QQ plot");
  if (!(variance > 0)) raise(ErrorCode::kMalformedInput, "QQ plot needs a positive variance");
  std::vector<double> s = values;
  std::sort(s.begin(), s.end());
  const double sd = std::sqrt(variance);
  const std::size_t n = s.size();
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = sd * normal_quantile((i + 0.5) / n);
  double lo = std::min(q.front(), s.front()), hi = std::max(q.back(), s.back());
  Canvas c(lo, hi, lo, hi);
  c.line(lo, lo, hi, hi, "stroke=\"#b03030\" stroke-dasharray=\"4 3\"");
  // Thin to at most 2000 points so large samples keep the file small.
  std::size_t step = std::max<std::size_t>(1, n / 2000);
  for (std::size_t i = 0; i < n; i += step) c.dot(q[i], s[i]);
  c.axes("normal quantile (variance " + fmt(variance) + ")", "sample quantile", plain, plain);
  return c.finish(title);
}

std::string svg_decay(const std::vector<double>& x, const std::vector<double>& y, const std::string& title) {
  if (x.size() != y.size()) raise(ErrorCode::kMalformedInput, "decay plot needs paired columns");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log10(x[i]));
      ly.push_back(std::log10(y[i]));
    }
  }
  if (lx.size() < 2) raise(ErrorCode::kMalformedInput, "decay plot needs two positive points");
  LineFit fit = fit_line(lx, ly);
  auto [x0, x1] = std::minmax_element(lx.begin(), lx.end());
  auto [y0, y1] = std::minmax_element(ly.begin(), ly.end());
  double pad = 0.05 * std::max(*y1 - *y0, 0.1);
  Canvas c(*x0, *x1, *y0 - pad, *y1 + pad);
  c.line(*x0, fit.intercept + fit.slope * *x0, *x1, fit.intercept + fit.slope * *x1,
         "stroke=\"#b03030\" stroke-dasharray=\"4 3\"");
  for (std::size_t i = 0; i < lx.size(); ++i) c.dot(lx[i], ly[i]);
  c.text(kWidth - kRight - 10, kTop + 16, "slope " + fmt(fit.slope, "%.3f"), "end");
  c.axes("x (log scale)", "y (log scale)", power, power);
  return c.finish(title);
}

std::string svg_cover(const std::vector<std::pair<double, double>>& arcs, const std::string& title) {
  if (arcs.empty()) raise(ErrorCode::kMalformedInput, "no arcs to plot");
  Canvas c(0, 1, 0, 1);
  double total = 0.0;
  for (auto [lo, hi] : arcs) {
    if (!(lo >= 0 && hi <= 1 && lo <= hi)) raise(ErrorCode::kMalformedInput, "arc outside [0, 1]");
    c.rect(lo, 0.35, std::max(hi, lo + 1e-3), 0.65, "#1f4e8c");
    total += hi - lo;
  }
  c.text(kWidth - kRight - 10, kTop + 16, "measure " + fmt(total, "%.4g") + ", " + std::to_string(arcs.size()) + " arcs",
         "end");
  c.axes("theta", "", plain, [](double) { return std::string(); });
  return c.finish(title);
}

namespace {

std::vector<double> numeric_column(const CsvTable& t, int col) {
  std::vector<double> out;
  for (const CsvRow& r : t.rows) {
    try {
      std::size_t used = 0;
      double v = std::stod(r[col], &used);
      if (used != r[col].size()) throw std::invalid_argument("trailing");
      out.push_back(v);
    } catch (const std::exception&) {
      raise(ErrorCode::kMalformedInput, "non-numeric CSV field '" + r[col] + "'");
    }
  }
  return out;
}

int pick_column(const CsvTable& t, std::initializer_list<const char*> names, int fallback) {
  for (const char* n : names) {
    int c = t.column(n);
    if (c >= 0) return c;
  }
  if (fallback >= static_cast<int>(t.header.size())) raise(ErrorCode::kMalformedInput, "CSV has too few columns");
  return fallback;
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\r' || c == '\t') continue;
    return c == '{' || c == '[';
  }
  return false;
}

}  // namespace

void plot_file(const std::string& input, const std::string& kind, const std::string& output) {
  if (kind != "histogram" && kind != "qq" && kind != "decay" && kind != "cover") {
    raise(ErrorCode::kUnknownKind, "unknown plot kind '" + kind + "' (histogram, qq, decay, cover)");
  }
  const std::string text = read_file(input);
  std::vector<double> values;
  double variance = 0.0;
  CsvTable table;
  const bool json_input = looks_like_json(text);
  if (json_input) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      raise(ErrorCode::kMalformedInput, std::string("malformed JSON: ") + e.what());
    }
    if (kind != "histogram" && kind != "qq") raise(ErrorCode::kMalformedInput, "JSON input supports histogram and qq only");
    if (!j.is_object() || !j.contains("Z") || !j["Z"].is_array()) {
      raise(ErrorCode::kMalformedInput, "JSON input needs a \"Z\" array");
    }
    for (const auto& v : j["Z"]) {
      if (!v.is_number()) raise(ErrorCode::kMalformedInput, "non-numeric entry in Z");
      values.push_back(v.get<double>());
    }
    if (j.contains("sigma2") && j["sigma2"].is_number()) variance = j["sigma2"].get<double>();
  } else {
    table = parse_csv(text);
    if (table.header.empty() || table.rows.empty()) raise(ErrorCode::kMalformedInput, "CSV input has no data rows");
  }
  std::string svg;
  const std::string title = kind + ": " + input.substr(input.find_last_of('/') + 1);
  if (kind == "histogram" || kind == "qq") {
    if (!json_input) values = numeric_column(table, pick_column(table, {"Z", "value"}, 0));
    if (values.empty()) raise(ErrorCode::kMalformedInput, "no samples to plot");
    if (variance <= 0) variance = moments(values).variance;
    svg = kind == "histogram" ? svg_histogram(values, title) : svg_qq(values, variance, title);
  } else if (kind == "decay") {
    std::vector<double> x = numeric_column(table, pick_column(table, {"T", "N", "x"}, 0));
    std::vector<double> y = numeric_column(table, pick_column(table, {"fraction", "value", "y"}, 1));
    svg = svg_decay(x, y, title);
  } else {
    int lo = table.column("lo"), hi = table.column("hi");
    if (lo < 0 || hi < 0) raise(ErrorCode::kMalformedInput, "cover CSV needs lo and hi columns");
    std::vector<double> a = numeric_column(table, lo), b = numeric_column(table, hi);
    std::vector<std::pair<double, double>> arcs;
    for (std::size_t i = 0; i < a.size(); ++i) arcs.emplace_back(a[i], b[i]);
    svg = svg_cover(arcs, title);
  }
  write_file(output, svg);
}

}  // namespace kochlab
