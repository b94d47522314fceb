#pragma once

#include <string>
#include <string_view>

namespace ccsp::cli {

// Minimal SVG document builder; all text is XML-escaped.
class Svg {
 public:
  Svg(double width, double height);

  void rect(double x, double y, double w, double h, std::string_view fill, std::string_view stroke = "none");
  void circle(double cx, double cy, double r, std::string_view fill, double opacity = 1.0);
  void line(double x1, double y1, double x2, double y2, std::string_view stroke, double width = 1.0);
  void text(double x, double y, std::string_view content, double size = 12.0, std::string_view anchor = "start");

  std::string finish() const;

 private:
  std::string body_;
  double width_;
  double height_;
};

std::string xml_escape(std::string_view text);

// Dark blue -> yellow ramp for t in [0, 1], as "#rrggbb".
std::string heat_color(double t);

}  // namespace ccsp::cli
