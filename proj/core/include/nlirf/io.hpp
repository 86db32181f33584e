#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nlirf {

// ---- JSON <-> Eigen ------------------------------------------------------------

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

/// Throw SchemaError(path, ...) on shape or type mismatch. rows/cols < 0 accept any.
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& path,
                                 int rows = -1, int cols = -1);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& path,
                                 int size = -1);
double number_from_json(const nlohmann::json& obj, const std::string& key,
                        const std::string& path);

/// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string hex64(std::uint64_t v);

// ---- CSV --------------------------------------------------------------------

/// Shortest round-trip decimal representation ('.' decimal point, no locale).
std::string format_real(double x);

/// Writes `t,<prefix>1,...,<prefix>n` then one row per matrix row, t = first_t + row.
void write_indexed_csv(std::ostream& out, const Eigen::MatrixXd& values,
                       std::string_view column_prefix, long first_t = 1);

// ---- SVG --------------------------------------------------------------------

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Line-drawing SVG canvas with a data-space viewport. Output is a pure function
/// of the drawing calls (fixed 4-decimal formatting, no timestamps).
class SvgCanvas {
 public:
  SvgCanvas(double width, double height, double x_min, double x_max, double y_min,
            double y_max, double margin = 40.0);

  void polyline(const std::vector<Point2>& pts, std::string_view color,
                double stroke_width = 1.0, double opacity = 1.0);
  void polygon(const std::vector<Point2>& pts, std::string_view fill, double opacity);
  void text(Point2 at, std::string_view content, double size = 12.0,
            std::string_view anchor = "middle");
  /// Pixel-space label outside the plotting area.
  void title(std::string_view content);
  void frame(std::string_view color = "#000000");
  void axes_ticks(int x_ticks, int y_ticks);

  std::string str() const;

 private:
  double px(double x) const;
  double py(double y) const;

  double width_, height_, x_min_, x_max_, y_min_, y_max_, margin_;
  std::vector<std::string> elements_;
};

}  // namespace nlirf
