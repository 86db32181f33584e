#include "nlirf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "nlirf/errors.hpp"

namespace nlirf {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& path,
                                 int rows, int cols) {
  // A bare number is accepted as a 1x1 matrix.
  if (j.is_number()) {
    if ((rows >= 0 && rows != 1) || (cols >= 0 && cols != 1)) {
      throw SchemaError(path, "expected a " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + " matrix");
    }
    return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  }
  if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw SchemaError(path + "[0]", "expected a row array");
  const auto c = static_cast<Eigen::Index>(j[0].size());
  if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols)) {
    throw SchemaError(path, "expected a " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " matrix, got " + std::to_string(r) +
                                "x" + std::to_string(c));
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw SchemaError(rp, "ragged matrix row");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto& cell = row[static_cast<std::size_t>(k)];
      if (!cell.is_number()) throw SchemaError(rp + "[" + std::to_string(k) + "]", "expected a number");
      m(i, k) = cell.get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& path, int size) {
  if (j.is_number()) {
    if (size >= 0 && size != 1) {
      throw SchemaError(path, "expected an array of length " + std::to_string(size));
    }
    return Eigen::VectorXd::Constant(1, j.get<double>());
  }
  if (!j.is_array()) throw SchemaError(path, "expected an array of numbers");
  if (size >= 0 && static_cast<int>(j.size()) != size) {
    throw SchemaError(path, "expected an array of length " + std::to_string(size) + ", got " +
                                std::to_string(j.size()));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

double number_from_json(const nlohmann::json& obj, const std::string& key,
                        const std::string& path) {
  const std::string p = path.empty() ? key : path + "." + key;
  if (!obj.is_object() || !obj.contains(key)) throw SchemaError(p, "missing required field");
  const auto& v = obj.at(key);
  if (!v.is_number()) throw SchemaError(p, "expected a number");
  return v.get<double>();
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_indexed_csv(std::ostream& out, const Eigen::MatrixXd& values,
                       std::string_view column_prefix, long first_t) {
  out << "t";
  for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << column_prefix << (j + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << (first_t + i);
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << format_real(values(i, j));
    out << '\n';
  }
}

// ---- SvgCanvas ------------------------------------------------------------------

namespace {

std::string fmt4(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
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

}  // namespace

SvgCanvas::SvgCanvas(double width, double height, double x_min, double x_max, double y_min,
                     double y_max, double margin)
    : width_(width), height_(height), x_min_(x_min), x_max_(x_max), y_min_(y_min),
      y_max_(y_max), margin_(margin) {
  if (!(x_max > x_min) || !(y_max > y_min)) throw DomainError("SvgCanvas: empty viewport");
}

double SvgCanvas::px(double x) const {
  return margin_ + (x - x_min_) / (x_max_ - x_min_) * (width_ - 2 * margin_);
}

double SvgCanvas::py(double y) const {
  return height_ - margin_ - (y - y_min_) / (y_max_ - y_min_) * (height_ - 2 * margin_);
}

void SvgCanvas::polyline(const std::vector<Point2>& pts, std::string_view color,
                         double stroke_width, double opacity) {
  if (pts.size() < 2) return;
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                  "\" stroke-width=\"" + fmt4(stroke_width) + "\"";
  if (opacity < 1.0) s += " stroke-opacity=\"" + fmt4(opacity) + "\"";
  s += " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += fmt4(px(pts[i].x)) + ',' + fmt4(py(pts[i].y));
  }
  s += "\"/>";
  elements_.push_back(std::move(s));
}

void SvgCanvas::polygon(const std::vector<Point2>& pts, std::string_view fill, double opacity) {
  if (pts.size() < 3) return;
  std::string s = "<polygon stroke=\"none\" fill=\"" + std::string(fill) +
                  "\" fill-opacity=\"" + fmt4(opacity) + "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += fmt4(px(pts[i].x)) + ',' + fmt4(py(pts[i].y));
  }
  s += "\"/>";
  elements_.push_back(std::move(s));
}

void SvgCanvas::text(Point2 at, std::string_view content, double size, std::string_view anchor) {
  elements_.push_back("<text x=\"" + fmt4(px(at.x)) + "\" y=\"" + fmt4(py(at.y)) +
                      "\" font-family=\"sans-serif\" font-size=\"" + fmt4(size) +
                      "\" text-anchor=\"" + std::string(anchor) + "\">" + escape_xml(content) +
                      "</text>");
}

void SvgCanvas::title(std::string_view content) {
  elements_.push_back("<text x=\"" + fmt4(width_ / 2) + "\" y=\"" + fmt4(margin_ / 2) +
                      "\" font-family=\"sans-serif\" font-size=\"14.0000\" "
                      "text-anchor=\"middle\">" +
                      escape_xml(content) + "</text>");
}

void SvgCanvas::frame(std::string_view color) {
  polyline({{x_min_, y_min_}, {x_max_, y_min_}, {x_max_, y_max_}, {x_min_, y_max_}, {x_min_, y_min_}},
           color, 1.0);
}

void SvgCanvas::axes_ticks(int x_ticks, int y_ticks) {
  for (int i = 0; i <= x_ticks; ++i) {
    const double x = x_min_ + (x_max_ - x_min_) * i / x_ticks;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    elements_.push_back("<text x=\"" + fmt4(px(x)) + "\" y=\"" + fmt4(height_ - margin_ + 14) +
                        "\" font-family=\"sans-serif\" font-size=\"10.0000\" "
                        "text-anchor=\"middle\">" +
                        std::string(buf) + "</text>");
  }
  for (int i = 0; i <= y_ticks; ++i) {
    const double y = y_min_ + (y_max_ - y_min_) * i / y_ticks;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", y);
    elements_.push_back("<text x=\"" + fmt4(margin_ - 4) + "\" y=\"" + fmt4(py(y) + 3) +
                        "\" font-family=\"sans-serif\" font-size=\"10.0000\" "
                        "text-anchor=\"end\">" +
                        std::string(buf) + "</text>");
  }
}

std::string SvgCanvas::str() const {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt4(width_) << "\" height=\""
     << fmt4(height_) << "\" viewBox=\"0 0 " << fmt4(width_) << ' ' << fmt4(height_) << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  for (const auto& e : elements_) os << e << '\n';
  os << "</svg>\n";
  return os.str();
}

}  // namespace nlirf
