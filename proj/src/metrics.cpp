// Copyright (C) 2026 The dcfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "dcfg/metrics.hpp"

#include "dcfg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dcfg {

std::vector<double> average_ranks(std::span<const double> values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
    require(scores.size() == labels.size(), "auroc: scores and labels differ in length");
    double n_pos = 0.0;
    double n_neg = 0.0;
    for (int l : labels) {
        require(l == 0 || l == 1, "auroc: labels must be 0 or 1");
        (l == 1 ? n_pos : n_neg) += 1.0;
    }
    if (n_pos == 0.0 || n_neg == 0.0) throw ConfigError("auroc: both classes must be present");
    for (double s : scores) require(std::isfinite(s), "auroc: non-finite score");
    auto ranks = average_ranks(scores);
    double pos_rank_sum = 0.0;
    for (size_t i = 0; i < ranks.size(); ++i)
        if (labels[i] == 1) pos_rank_sum += ranks[i];
    return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double auroc(const std::vector<std::pair<double, int>>& scored) {
    std::vector<double> s;
    std::vector<int> l;
    for (const auto& [score, label] : scored) {
        s.push_back(score);
        l.push_back(label);
    }
    return auroc(s, l);
}

BatchTable tabulate(const GMMWorld& world, const std::vector<CounterfactualRecord>& records) {
    BatchTable b;
    for (const auto& n : world.graph().nodes()) {
        b.attribute_names.push_back(n.name);
        b.cardinalities.push_back(n.cardinality);
    }
    const bool have_rev = !records.empty() && std::all_of(records.begin(), records.end(),
                                                          [](const auto& r) { return r.x_rev.has_value(); });
    for (const auto& r : records) {
        b.pa.push_back(r.pa);
        b.cf_pa.push_back(r.cf_pa);
        std::vector<std::vector<double>> post;
        for (int i = 0; i < world.attributes(); ++i) post.push_back(bayes_posterior(world, r.x_cf, i));
        b.posterior.push_back(std::move(post));
        b.x0.push_back(r.x0);
        b.x_cf.push_back(r.x_cf);
        if (have_rev) b.x_rev.push_back(*r.x_rev);
    }
    return b;
}

std::vector<std::optional<double>> effectiveness(const BatchTable& batch) {
    const size_t k = batch.attribute_names.size();
    std::vector<std::optional<double>> out(k);
    for (size_t i = 0; i < k; ++i) {
        const int card = batch.cardinalities[i];
        std::vector<int> positives = card == 2 ? std::vector<int>{1} : std::vector<int>{};
        if (card > 2)
            for (int v = 0; v < card; ++v) positives.push_back(v);
        double sum = 0.0;
        int used = 0;
        for (int v : positives) {
            std::vector<double> scores;
            std::vector<int> labels;
            for (size_t n = 0; n < batch.size(); ++n) {
                scores.push_back(batch.posterior[n][i][static_cast<size_t>(v)]);
                labels.push_back(batch.cf_pa[n][i] == v ? 1 : 0);
            }
            const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
            const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
            if (!has_pos || !has_neg) continue;
            sum += auroc(scores, labels);
            ++used;
        }
        if (used > 0) out[i] = sum / used;
    }
    return out;
}

std::vector<std::optional<double>> effectiveness(const std::vector<CounterfactualRecord>& records,
                                                 const GMMWorld& world) {
    return effectiveness(tabulate(world, records));
}

std::vector<double> per_item_mae(const std::vector<Vec>& a, const std::vector<Vec>& b) {
    require(a.size() == b.size(), "per_item_mae: size mismatch");
    std::vector<double> out;
    out.reserve(a.size());
    for (size_t i = 0; i < a.size(); ++i) out.push_back((a[i] - b[i]).cwiseAbs().mean());
    return out;
}

namespace {

Reversibility reversibility_of(const std::vector<Vec>& x0, const std::vector<Vec>& x_rev) {
    require(!x0.empty() && x0.size() == x_rev.size(), "reversibility: batch has no reversed samples");
    Reversibility r;
    for (size_t i = 0; i < x0.size(); ++i) {
        Vec d = x_rev[i] - x0[i];
        r.mae += d.cwiseAbs().mean();
        r.mse += d.squaredNorm() / static_cast<double>(d.size());
    }
    r.mae /= static_cast<double>(x0.size());
    r.mse /= static_cast<double>(x0.size());
    return r;
}

} // namespace

Reversibility reversibility(const BatchTable& batch) { return reversibility_of(batch.x0, batch.x_rev); }

Reversibility reversibility(const std::vector<CounterfactualRecord>& records) {
    std::vector<Vec> x0;
    std::vector<Vec> xr;
    for (const auto& r : records) {
        require(r.x_rev.has_value(), "reversibility: record without reversed sample");
        x0.push_back(r.x0);
        xr.push_back(*r.x_rev);
    }
    return reversibility_of(x0, xr);
}

double composition(const Denoiser& model, const Vec& x0, const AttributeVector& pa, int stride) {
    const TimestepGrid grid = make_grid(model.schedule().steps(), stride);
    const ConditionSlots s = ConditionSlots::from(pa);
    Vec latent = invert(model, NoGuidance{}, x0, s, grid).final_state();
    Vec recon = generate(model, NoGuidance{}, latent, s, grid).final_state();
    return (recon - x0).cwiseAbs().mean();
}

void compute_deltas(std::vector<EvalReport>& reports) {
    const EvalReport* base = nullptr;
    for (const auto& r : reports)
        if (r.baseline) {
            base = &r;
            break;
        }
    if (!base) throw MissingBaselineError("evaluate: no omega = 1 baseline batch among the inputs");
    const auto base_auroc = base->auroc;
    for (auto& r : reports) {
        r.delta.assign(r.auroc.size(), std::nullopt);
        for (size_t i = 0; i < r.auroc.size() && i < base_auroc.size(); ++i)
            if (r.auroc[i] && base_auroc[i]) r.delta[i] = 100.0 * (*r.auroc[i] - *base_auroc[i]);
    }
}

double sign_test_p(int wins, int losses) {
    require(wins >= 0 && losses >= 0, "sign_test_p: negative counts");
    const int n = wins + losses;
    if (n == 0) return 1.0;
    double p = 0.0;
    for (int k = wins; k <= n; ++k) {
        double log_term = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0);
        p += std::exp(log_term);
    }
    return std::min(1.0, p);
}

double spearman(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size() && a.size() >= 2, "spearman: need two equal-length samples of size >= 2");
    auto ra = average_ranks(a);
    auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

} // namespace dcfg
