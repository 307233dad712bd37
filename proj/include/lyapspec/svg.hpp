#pragma once

#include <string>
#include <vector>

namespace lyap {

// Minimal self-contained SVG line plots for the CLI reports.  Non-finite
// samples split a series into separate polyline segments.
struct SvgSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
    std::string label;
};

struct SvgGuide {
    bool vertical = false;  // vertical guide at `value`, else horizontal
    double value = 0.0;
    std::string color = "#888888";
    std::string label;
};

class SvgPlot {
  public:
    SvgPlot(std::string title, std::string xlabel, std::string ylabel);

    void add_series(SvgSeries series);
    void add_vline(double x, std::string color, std::string label);
    void add_hline(double y, std::string color, std::string label);

    std::string render(int width = 720, int height = 480) const;

  private:
    std::string title_, xlabel_, ylabel_;
    std::vector<SvgSeries> series_;
    std::vector<SvgGuide> guides_;
};

}  // namespace lyap
