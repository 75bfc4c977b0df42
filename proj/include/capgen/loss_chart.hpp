#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace capgen {

struct LossRow {
    std::size_t epoch = 0;
    double mean_loss = 0.0;

    bool operator==(const LossRow&) const = default;
};

// `epoch,mean_loss` header, one row per epoch, '\n' endings.
std::string write_loss_csv(const std::vector<double>& epoch_losses);
std::vector<LossRow> parse_loss_csv(std::string_view contents);

// Self-contained SVG line chart: epoch on x, mean loss on y, one circle per
// row, points joined in epoch order.
std::string render_loss_svg(const std::vector<LossRow>& rows);

}  // namespace capgen
