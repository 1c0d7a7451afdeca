#include "geosid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include <json.hpp>

#include "geosid/error.hpp"
#include "geosid/format.hpp"

namespace geosid {

namespace {

// Re-throws library errors with the pipeline stage prepended to the message.
template <class F>
auto in_stage(const std::string& stage, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        std::string msg = e.what();
        const std::string prefix = e.code() + ": ";
        if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
        throw Error(e.kind(), e.code(), stage + ": " + msg);
    }
}

std::vector<std::vector<Code>> make_keys(std::size_t n, std::size_t depth, std::span<const Code> j1,
                                         std::span<const Code> j2) {
    std::vector<std::vector<Code>> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (depth >= 1) keys[i].push_back(j1[i]);
        if (depth >= 2) keys[i].push_back(j2[i]);
    }
    return keys;
}

bool stage_before(const TrainConfig& cfg, std::uint32_t layer) {
    if (!cfg.uses_geo()) return false;
    switch (cfg.rope_layer) {
        case RopeLayer::second: return layer == 2;
        case RopeLayer::third: return layer == 3;
        case RopeLayer::both: return true;
    }
    return false;
}

std::uint32_t key_depth_for(const TrainConfig& cfg, std::uint32_t before_layer) {
    return cfg.coord_frame == CoordFrame::global ? 0 : before_layer - 1;
}

GeoAnchor anchor_for(std::span<const GeoPoint> pts, const TrainConfig& cfg) {
    GeoAnchor a;
    a.center = geo_centroid(pts);
    if (cfg.d_scale_km > 0.0) {
        a.d_scale_km = cfg.d_scale_km;
    } else {
        double max_d = 0.0;
        for (const auto& p : pts) max_d = std::max(max_d, haversine_km(a.center, p));
        // A group with every member on its centroid has no spread to normalize;
        // any positive scale gives d_norm = 0 for all of them.
        a.d_scale_km = max_d > 0.0 ? max_d : 1.0;
    }
    return a;
}

std::string key_text(const std::vector<Code>& key) {
    std::string out = "(";
    for (std::size_t i = 0; i < key.size(); ++i) out += (i ? "," : "") + std::to_string(key[i]);
    return out + ")";
}

}  // namespace

GeoStage fit_geo_stage(std::span<const GeoPoint> locations, const std::vector<std::vector<Code>>& keys,
                       std::uint32_t before_layer, const TrainConfig& cfg, std::vector<std::string>* warnings) {
    GeoStage st;
    st.before_layer = before_layer;
    st.key_depth = key_depth_for(cfg, before_layer);
    std::map<std::vector<Code>, std::vector<GeoPoint>> groups;
    for (std::size_t i = 0; i < locations.size(); ++i) groups[keys[i]].push_back(locations[i]);
    for (const auto& [key, pts] : groups) {
        if (warnings && wide_longitude_spread(pts)) {
            warnings->push_back("group " + key_text(key) + " before layer " + std::to_string(before_layer) +
                                " spans more than 180 degrees of longitude; its geo-centroid is unreliable");
        }
        st.anchors.emplace(key, anchor_for(pts, cfg));
    }
    st.fallback = anchor_for(locations, cfg);
    return st;
}

Matrix enhance(const Matrix& residual, std::span<const GeoPoint> locations,
               const std::vector<std::vector<Code>>& keys, const GeoStage& stage, const TrainConfig& cfg) {
    Matrix out(residual.rows(), variant_vector_dim(residual.cols(), cfg));
    for (std::size_t i = 0; i < residual.rows(); ++i) {
        const GeoAnchor& a = stage.lookup(keys[i]);
        const NormalizedGeo geo = normalize_geo(to_local_polar(a.center, locations[i]), a.d_scale_km);
        build_variant_vector_into(residual.row(i), geo, cfg, out.row(i));
    }
    return out;
}

RunResult run(const Corpus& corpus, const TrainConfig& cfg, ExecPolicy policy) {
    const auto start = std::chrono::steady_clock::now();
    in_stage("config", [&] {
        cfg.validate();
        if (cfg.layer_sizes.size() != 3) fail("InvalidConfig", "a full run needs exactly three layer sizes");
        corpus.validate();
        if (corpus.size() == 0) fail("EmptyInput", "corpus has no POIs");
    });

    RunResult res;
    res.artifact.config = cfg;
    const Matrix x = corpus.ordered_embeddings();
    const auto locations = corpus.locations();
    const std::size_t n = corpus.size();
    const KMeansOptions opts{cfg.max_iters, cfg.tol, policy};

    auto l1 = in_stage("layer 1", [&] { return fit_layer(x, cfg.layer_sizes[0], cfg.metric(), layer_seed(cfg.seed, 0), opts); });

    Matrix input2 = std::move(l1.residual);
    if (stage_before(cfg, 2)) {
        in_stage("geo stage before layer 2", [&] {
            const auto keys = make_keys(n, key_depth_for(cfg, 2), l1.codes, {});
            auto st = fit_geo_stage(locations, keys, 2, cfg, &res.warnings);
            input2 = enhance(input2, locations, keys, st, cfg);
            res.artifact.geo_stages.push_back(std::move(st));
        });
    }
    auto l2 = in_stage("layer 2", [&] { return fit_layer(input2, cfg.layer_sizes[1], cfg.metric(), layer_seed(cfg.seed, 1), opts); });

    Matrix input3 = std::move(l2.residual);
    if (stage_before(cfg, 3)) {
        in_stage("geo stage before layer 3", [&] {
            const auto keys = make_keys(n, key_depth_for(cfg, 3), l1.codes, l2.codes);
            auto st = fit_geo_stage(locations, keys, 3, cfg, &res.warnings);
            input3 = enhance(input3, locations, keys, st, cfg);
            res.artifact.geo_stages.push_back(std::move(st));
        });
    }
    auto l3 = in_stage("layer 3", [&] { return fit_layer(input3, cfg.layer_sizes[2], cfg.metric(), layer_seed(cfg.seed, 2), opts); });

    res.artifact.layers = {std::move(l1.layer), std::move(l2.layer), std::move(l3.layer)};
    const auto caps = res.artifact.capacities();
    std::vector<SidEntry> entries;
    entries.reserve(n);
    res.sids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        res.sids.push_back(assemble(l1.codes[i], l2.codes[i], l3.codes[i], caps));
        entries.push_back({corpus.pois[i].id, res.sids.back(), locations[i]});
    }
    res.artifact.index = SidIndex(std::move(entries));
    res.report = quant_report(res.sids, locations, caps);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

std::vector<Sid> assign_corpus(const CodebookArtifact& artifact, const Corpus& corpus, ExecPolicy policy) {
    if (artifact.layers.size() != 3) fail("InvalidArtifact", "codebook must have three layers");
    corpus.validate();
    const auto& cfg = artifact.config;
    const Matrix x = corpus.ordered_embeddings();
    const auto locations = corpus.locations();
    const std::size_t n = corpus.size();
    if (x.cols() != artifact.layers[0].dim()) {
        fail("DimensionMismatch", "corpus dimension " + std::to_string(x.cols()) + " but codebook expects " +
                                      std::to_string(artifact.layers[0].dim()));
    }
    auto find_stage = [&](std::uint32_t layer) -> const GeoStage* {
        for (const auto& st : artifact.geo_stages) {
            if (st.before_layer == layer) return &st;
        }
        return nullptr;
    };

    auto l1 = apply_layer(x, artifact.layers[0], policy);
    Matrix input2 = std::move(l1.residual);
    if (const auto* st = find_stage(2)) {
        input2 = enhance(input2, locations, make_keys(n, st->key_depth, l1.codes, {}), *st, cfg);
    }
    if (input2.cols() != artifact.layers[1].dim()) fail("InvalidArtifact", "layer 2 width does not match its input");
    auto l2 = apply_layer(input2, artifact.layers[1], policy);
    Matrix input3 = std::move(l2.residual);
    if (const auto* st = find_stage(3)) {
        input3 = enhance(input3, locations, make_keys(n, st->key_depth, l1.codes, l2.codes), *st, cfg);
    }
    if (input3.cols() != artifact.layers[2].dim()) fail("InvalidArtifact", "layer 3 width does not match its input");
    auto l3 = apply_layer(input3, artifact.layers[2], policy);

    const auto caps = artifact.capacities();
    std::vector<Sid> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(assemble(l1.codes[i], l2.codes[i], l3.codes[i], caps));
    return out;
}

std::vector<ReportRow> compare(const Corpus& corpus, const std::vector<TrainConfig>& cfgs, ExecPolicy policy) {
    std::vector<ReportRow> rows;
    rows.reserve(cfgs.size());
    for (const auto& cfg : cfgs) rows.push_back({cfg.label(), cfg, run(corpus, cfg, policy).report});
    return rows;
}

const SweepGrid& default_sweep_grid() {
    static const SweepGrid grid{{0.0, 0.0}, {0.25, 0.25}, {0.25, 0.5}, {0.5, 0.25},
                                {0.5, 0.5}, {0.5, 1.0},   {1.0, 0.5},  {1.0, 1.0}};
    return grid;
}

std::vector<ReportRow> sweep_alpha_beta(const Corpus& corpus, const SweepGrid& grid, const TrainConfig& base,
                                        ExecPolicy policy) {
    if (grid.empty()) fail("InvalidGrid", "sweep grid is empty");
    std::vector<TrainConfig> cfgs;
    for (const auto& [a, b] : grid) {
        if (!(a >= 0.0) || !(b >= 0.0)) fail("InvalidGrid", "sweep entries must be non-negative");
        TrainConfig c = base;
        c.variant = Variant::pro_geo;
        c.alpha = a;
        c.beta = b;
        cfgs.push_back(c);
    }
    auto rows = compare(corpus, cfgs, policy);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].label = "(" + shortest(grid[i].first) + "," + shortest(grid[i].second) + ")";
    }
    return rows;
}

std::vector<ReportRow> sweep_attributes(const Corpus& corpus, const TrainConfig& base, ExecPolicy policy) {
    std::vector<TrainConfig> cfgs;
    for (auto attrs : attribute_ablation_rows()) {
        TrainConfig c = base;
        c.variant = Variant::pro_geo;
        c.geo_attributes = attrs;
        cfgs.push_back(c);
    }
    auto rows = compare(corpus, cfgs, policy);
    for (auto& r : rows) r.label = "w/ R(" + r.config.geo_attributes.to_string() + ")";
    return rows;
}

std::string format_table(const std::vector<ReportRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Method"};
    for (const auto& c : quant_report_columns()) header.push_back(c);
    cells.push_back(header);
    for (const auto& r : rows) {
        std::vector<std::string> line{r.label};
        for (auto& c : quant_report_cells(r.report)) line.push_back(std::move(c));
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
    }
    std::string out = "# CUR = distinct (j1,j2,j3) / (K1*K2*K3); distances in km to the SID group geo-centroid\n";
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            const std::size_t pad = width[c] - line[c].size();
            if (c == 0) {
                out += line[c] + std::string(pad, ' ');
            } else {
                out += "  " + std::string(pad, ' ') + line[c];
            }
        }
        out += '\n';
    }
    return out;
}

std::string format_records(const std::vector<ReportRow>& rows) {
    std::string out;
    for (const auto& r : rows) {
        nlohmann::ordered_json j;
        j["label"] = r.label;
        j["variant"] = to_string(r.config.variant);
        j["alpha"] = r.config.alpha;
        j["beta"] = r.config.beta;
        j["geo_attributes"] = r.config.geo_attributes.to_string();
        j["rope_layer"] = to_string(r.config.rope_layer);
        j["coord_frame"] = to_string(r.config.coord_frame);
        j["layer_sizes"] = r.config.layer_sizes;
        j["seed"] = r.config.seed;
        j["cur"] = r.report.cur;
        j["icr"] = r.report.icr;
        j["avg_dist_km"] = r.report.avg_dist_km;
        j["p90_dist_km"] = r.report.p90_dist_km;
        j["p95_dist_km"] = r.report.p95_dist_km;
        j["group_count"] = r.report.group_count;
        j["poi_count"] = r.report.poi_count;
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace geosid
