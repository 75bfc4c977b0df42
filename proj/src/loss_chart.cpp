#include "capgen/loss_chart.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>

#include "capgen/errors.hpp"

namespace capgen {

std::string write_loss_csv(const std::vector<double>& epoch_losses) {
    std::string out = "epoch,mean_loss\n";
    char buf[64];
    for (std::size_t i = 0; i < epoch_losses.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.6f\n", i + 1, epoch_losses[i]);
        out += buf;
    }
    return out;
}

std::vector<LossRow> parse_loss_csv(std::string_view contents) {
    std::vector<LossRow> rows;
    std::size_t pos = 0, line_no = 0;
    bool saw_header = false;
    while (pos < contents.size()) {
        std::size_t eol = contents.find('\n', pos);
        if (eol == std::string_view::npos) eol = contents.size();
        std::string_view line = contents.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        if (!saw_header) {
            if (line != "epoch,mean_loss")
                throw MalformedCsv("line 1: expected header 'epoch,mean_loss', got '" + std::string(line) + "'");
            saw_header = true;
            continue;
        }
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos || comma == 0 || comma + 1 >= line.size())
            throw MalformedCsv("line " + std::to_string(line_no) + ": expected '<epoch>,<loss>'");
        const std::string epoch_field(line.substr(0, comma));
        const std::string loss_field(line.substr(comma + 1));
        char* end = nullptr;
        errno = 0;
        const unsigned long long epoch = std::strtoull(epoch_field.c_str(), &end, 10);
        if (errno != 0 || end != epoch_field.c_str() + epoch_field.size() || epoch == 0)
            throw MalformedCsv("line " + std::to_string(line_no) + ": bad epoch '" + epoch_field + "'");
        errno = 0;
        const double loss = std::strtod(loss_field.c_str(), &end);
        if (errno != 0 || end != loss_field.c_str() + loss_field.size())
            throw MalformedCsv("line " + std::to_string(line_no) + ": bad loss '" + loss_field + "'");
        rows.push_back({static_cast<std::size_t>(epoch), loss});
    }
    if (!saw_header) throw MalformedCsv("missing 'epoch,mean_loss' header");
    if (rows.empty()) throw MalformedCsv("no data rows after the header");
    return rows;
}

namespace {

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt_loss(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::string render_loss_svg(const std::vector<LossRow>& rows) {
    if (rows.empty()) throw MalformedCsv("cannot chart an empty loss table");

    const double width = 800.0, height = 500.0;
    const double left = 70.0, right = 30.0, top = 30.0, bottom = 60.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    std::size_t min_epoch = rows.front().epoch, max_epoch = rows.front().epoch;
    double max_loss = rows.front().mean_loss;
    for (const auto& rw : rows) {
        min_epoch = std::min(min_epoch, rw.epoch);
        max_epoch = std::max(max_epoch, rw.epoch);
        max_loss = std::max(max_loss, rw.mean_loss);
    }
    if (max_loss <= 0.0) max_loss = 1.0;
    const double epoch_span = max_epoch > min_epoch ? static_cast<double>(max_epoch - min_epoch) : 1.0;

    auto sx = [&](std::size_t epoch) {
        return left + plot_w * (static_cast<double>(epoch - min_epoch) / epoch_span);
    };
    auto sy = [&](double loss) { return top + plot_h * (1.0 - loss / max_loss); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "  <rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg += "  <line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top + plot_h) + "\" x2=\"" + fmt(left + plot_w) +
           "\" y2=\"" + fmt(top + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "  <line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
           fmt(top + plot_h) + "\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + fmt(left + plot_w / 2) + "\" y=\"" + fmt(height - 15.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">epoch</text>\n";
    svg += "  <text x=\"20\" y=\"" + fmt(top + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" transform=\"rotate(-90 20 " +
           fmt(top + plot_h / 2) + ")\">mean loss</text>\n";
    svg += "  <text x=\"" + fmt(left) + "\" y=\"" + fmt(top + plot_h + 20.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + std::to_string(min_epoch) +
           "</text>\n";
    svg += "  <text x=\"" + fmt(left + plot_w) + "\" y=\"" + fmt(top + plot_h + 20.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + std::to_string(max_epoch) +
           "</text>\n";
    svg += "  <text x=\"" + fmt(left - 8.0) + "\" y=\"" + fmt(top + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt_loss(max_loss) +
           "</text>\n";
    svg += "  <text x=\"" + fmt(left - 8.0) + "\" y=\"" + fmt(top + plot_h + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">0</text>\n";

    if (rows.size() > 1) {
        svg += "  <polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i) svg += " ";
            svg += fmt(sx(rows[i].epoch)) + "," + fmt(sy(rows[i].mean_loss));
        }
        svg += "\"/>\n";
    }
    for (const auto& rw : rows)
        svg += "  <circle cx=\"" + fmt(sx(rw.epoch)) + "\" cy=\"" + fmt(sy(rw.mean_loss)) +
               "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace capgen
