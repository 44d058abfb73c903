#pragma once

#include "core/netpbm.hpp"
#include "evalkit/matrix.hpp"

#include <filesystem>
#include <string>

namespace opf::evalkit {

// Brightness encodes similarity: the smallest distance renders white (255),
// the largest black (0). A degenerate matrix (max = min) renders uniform
// mid-gray 128. Absent entries render black. cell_px scales each cell to a
// square block.
netpbm::GrayImage render_heatmap_pgm(const DistanceMatrix& m, uint32_t cell_px = 16);

std::string render_heatmap_svg(const DistanceMatrix& m, uint32_t cell_px = 24);

// Writes `<base>.pgm` and `<base>.svg` next to each other.
void write_heatmap(const DistanceMatrix& m, const std::filesystem::path& base_path,
                   uint32_t cell_px = 16);

// Plain-text matrix with threshold marks: same-identity entries at or under
// the threshold render as *v* (true positive), misclassified entries as !v!
// (false positive or false negative), everything else unmarked; absent
// entries render as -.
std::string render_marked_table(const DistanceMatrix& m, double threshold, int precision = 4);

} // namespace opf::evalkit
