#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sgdlab {

struct PlotOptions {
  std::string column = "f";  // "f" or "grad_norm_sq"
  std::string title;
};

/// Renders trajectory CSVs (schema: step,f,grad_norm_sq,gamma_k,gamma_l,inner,alpha)
/// as a self-contained SVG line chart: linear steps on x, log-scale values on
/// y, one polyline per input file, legend from file stems. Non-positive values
/// cannot be drawn on the log axis and are skipped.
std::string render_plot(const std::vector<std::filesystem::path>& inputs,
                        const PlotOptions& opts = {});

void emit_plot(const std::vector<std::filesystem::path>& inputs,
               const std::filesystem::path& out_svg, const PlotOptions& opts = {});

}  // namespace sgdlab
