// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/io.hpp"

#include "dcfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace dcfg {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

} // namespace

void write_batch_csv(std::ostream& os, const BatchTable& b) {
    const size_t dim = b.x0.empty() ? 0 : static_cast<size_t>(b.x0.front().size());
    const bool rev = !b.x_rev.empty();
    os << "item_id";
    for (const auto& n : b.attribute_names) os << ",pa_" << n;
    for (const auto& n : b.attribute_names) os << ",cf_pa_" << n;
    for (size_t d = 0; d < dim; ++d) os << ",x0_" << d;
    for (size_t d = 0; d < dim; ++d) os << ",xcf_" << d;
    if (rev)
        for (size_t d = 0; d < dim; ++d) os << ",xrev_" << d;
    for (size_t i = 0; i < b.attribute_names.size(); ++i)
        for (int v = 0; v < b.cardinalities[i]; ++v) os << ",post_" << b.attribute_names[i] << "_" << v;
    os << "\n";
    for (size_t n = 0; n < b.size(); ++n) {
        os << n;
        for (int v : b.pa[n]) os << "," << v;
        for (int v : b.cf_pa[n]) os << "," << v;
        for (size_t d = 0; d < dim; ++d) os << "," << format_double(b.x0[n][static_cast<Eigen::Index>(d)]);
        for (size_t d = 0; d < dim; ++d) os << "," << format_double(b.x_cf[n][static_cast<Eigen::Index>(d)]);
        if (rev)
            for (size_t d = 0; d < dim; ++d) os << "," << format_double(b.x_rev[n][static_cast<Eigen::Index>(d)]);
        for (const auto& post : b.posterior[n])
            for (double p : post) os << "," << format_double(p);
        os << "\n";
    }
}

BatchTable read_batch_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("batch: cannot read '" + path + "'");
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("batch: empty file '" + path + "'");
    const auto header = split(line);

    BatchTable b;
    std::vector<size_t> pa_col, cf_col, x0_col, xcf_col, xrev_col;
    std::map<std::string, std::vector<size_t>> post_cols;
    for (size_t c = 0; c < header.size(); ++c) {
        const auto& h = header[c];
        if (starts_with(h, "cf_pa_")) {
            cf_col.push_back(c);
        } else if (starts_with(h, "pa_")) {
            pa_col.push_back(c);
            b.attribute_names.push_back(h.substr(3));
        } else if (starts_with(h, "x0_")) {
            x0_col.push_back(c);
        } else if (starts_with(h, "xcf_")) {
            xcf_col.push_back(c);
        } else if (starts_with(h, "xrev_")) {
            xrev_col.push_back(c);
        } else if (starts_with(h, "post_")) {
            // post_<name>_<value>; names may contain underscores, the value never does.
            const auto cut = h.rfind('_');
            post_cols[h.substr(5, cut - 5)].push_back(c);
        }
    }
    require(!pa_col.empty() && pa_col.size() == cf_col.size() && !x0_col.empty() && x0_col.size() == xcf_col.size(),
            "batch: '" + path + "' has an unexpected header");
    std::vector<std::vector<size_t>> post_by_attr;
    for (const auto& n : b.attribute_names) {
        auto it = post_cols.find(n);
        require(it != post_cols.end(), "batch: missing posterior columns for '" + n + "'");
        b.cardinalities.push_back(static_cast<int>(it->second.size()));
        post_by_attr.push_back(it->second);
    }

    auto vec_of = [](const std::vector<std::string>& f, const std::vector<size_t>& cols) {
        Vec v(static_cast<Eigen::Index>(cols.size()));
        for (size_t k = 0; k < cols.size(); ++k) v[static_cast<Eigen::Index>(k)] = std::stod(f.at(cols[k]));
        return v;
    };
    size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split(line);
        require(f.size() == header.size(), "batch: row " + std::to_string(row) + " has wrong field count");
        try {
            AttributeVector pa, cf;
            for (size_t c : pa_col) pa.push_back(std::stoi(f[c]));
            for (size_t c : cf_col) cf.push_back(std::stoi(f[c]));
            b.pa.push_back(std::move(pa));
            b.cf_pa.push_back(std::move(cf));
            b.x0.push_back(vec_of(f, x0_col));
            b.x_cf.push_back(vec_of(f, xcf_col));
            if (!xrev_col.empty()) b.x_rev.push_back(vec_of(f, xrev_col));
            std::vector<std::vector<double>> post;
            for (const auto& cols : post_by_attr) {
                std::vector<double> p;
                for (size_t c : cols) p.push_back(std::stod(f[c]));
                post.push_back(std::move(p));
            }
            b.posterior.push_back(std::move(post));
        } catch (const std::logic_error&) {
            throw ConfigError("batch: row " + std::to_string(row) + " of '" + path + "' is not numeric");
        }
    }
    return b;
}

void write_trajectory_csv(std::ostream& os, const std::vector<std::pair<size_t, Trajectory>>& items, int dim) {
    os << "item_id,phase,t";
    for (int d = 0; d < dim; ++d) os << ",x_" << d;
    os << "\n";
    for (const auto& [id, tr] : items) {
        const char* phase = tr.direction == Direction::Invert ? "invert" : "generate";
        for (const auto& st : tr.states) {
            os << id << "," << phase << "," << st.t;
            for (Eigen::Index d = 0; d < st.x.size(); ++d) os << "," << format_double(st.x[d]);
            os << "\n";
        }
    }
}

void write_report_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    if (reports.empty()) return;
    const auto& names = reports.front().attribute_names;
    os << "config,baseline,samples,world_fingerprint,config_hash";
    for (const auto& n : names) os << ",auroc_" << n << ",delta_" << n;
    os << ",rev_mae,mse_lpips_standin,comp_mae\n";
    for (const auto& r : reports) {
        os << r.label << "," << (r.baseline ? 1 : 0) << "," << r.samples << "," << r.world_fingerprint << ","
           << r.config_hash;
        for (size_t i = 0; i < names.size(); ++i) {
            os << "," << (i < r.auroc.size() ? opt(r.auroc[i]) : "");
            os << "," << (i < r.delta.size() ? opt(r.delta[i]) : "");
        }
        os << "," << opt(r.rev_mae) << "," << opt(r.rev_mse) << "," << opt(r.comp_mae) << "\n";
    }
}

void write_plot_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
    os << "configuration,attribute,delta\n";
    for (const auto& r : reports)
        for (size_t i = 0; i < r.attribute_names.size() && i < r.delta.size(); ++i)
            os << r.label << "," << r.attribute_names[i] << "," << opt(r.delta[i]) << "\n";
}

void write_delta_svg(std::ostream& os, const std::vector<EvalReport>& reports) {
    const int group_w = 90;
    const int height = 320;
    const int margin = 50;
    const int mid = height / 2;
    const size_t attrs = reports.empty() ? 0 : reports.front().attribute_names.size();
    double span = 1.0;
    for (const auto& r : reports)
        for (const auto& d : r.delta)
            if (d) span = std::max(span, std::abs(*d));
    const double px_per_point = (mid - margin) / span;
    const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
    const int width = margin * 2 + static_cast<int>(reports.size()) * group_w;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + 60 << "\">\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << mid << "\" x2=\"" << width - margin << "\" y2=\"" << mid
       << "\" stroke=\"black\"/>\n";
    for (size_t g = 0; g < reports.size(); ++g) {
        const auto& r = reports[g];
        const double bar_w = (group_w - 20.0) / std::max<size_t>(attrs, 1);
        for (size_t i = 0; i < attrs && i < r.delta.size(); ++i) {
            if (!r.delta[i]) continue;
            const double h = *r.delta[i] * px_per_point;
            const double x = margin + static_cast<double>(g) * group_w + 10.0 + static_cast<double>(i) * bar_w;
            const double y = h >= 0 ? mid - h : mid;
            os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w - 2 << "\" height=\"" << std::abs(h)
               << "\" fill=\"" << colors[i % 6] << "\"/>\n";
        }
        os << "<text x=\"" << margin + static_cast<double>(g) * group_w + group_w / 2.0 << "\" y=\"" << height + 15
           << "\" font-size=\"9\" text-anchor=\"middle\">" << r.label << "</text>\n";
    }
    for (size_t i = 0; i < attrs; ++i)
        os << "<text x=\"" << margin << "\" y=\"" << 15 + 14 * i << "\" font-size=\"11\" fill=\"" << colors[i % 6]
           << "\">" << reports.front().attribute_names[i] << "</text>\n";
    os << "</svg>\n";
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    os << content;
}

} // namespace dcfg
