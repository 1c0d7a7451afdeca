#include "geosid/cli.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "geosid/data_io.hpp"
#include "geosid/error.hpp"
#include "geosid/format.hpp"
#include "geosid/georope.hpp"
#include "geosid/kernels.hpp"
#include "geosid/pipeline.hpp"

namespace geosid {

namespace {

struct TrainFlags {
    std::string k = "512,512,512";
    std::string variant = "pro_geo";
    double alpha = 0.5;
    double beta = 0.5;
    std::string attrs = "all";
    std::string rope_layer = "third";
    std::string coord_frame = "local";
    double d_scale_km = 0.0;
    std::uint32_t max_iters = 100;
    double tol = 1e-4;
    std::uint64_t seed = 0;

    void add_to(CLI::App& app) {
        app.add_option("--k", k, "Comma-separated codebook sizes K1,K2,K3")->capture_default_str();
        app.add_option("--variant", variant,
                       "pro_geo | rq_kmeans_euclidean | cosine_only | concat_geo | add_geo")
            ->capture_default_str();
        app.add_option("--alpha", alpha, "Azimuth rotation scale (>= 0)")->capture_default_str();
        app.add_option("--beta", beta, "Distance rotation scale (>= 0)")->capture_default_str();
        app.add_option("--attrs", attrs, "Geo attributes, e.g. s+,s-,d+,d- or all")->capture_default_str();
        app.add_option("--rope-layer", rope_layer, "Where geo enters: second | third | both")
            ->capture_default_str();
        app.add_option("--coord-frame", coord_frame, "Polar frame origin: local (per cluster) | global")
            ->capture_default_str();
        app.add_option("--d-scale-km", d_scale_km, "Distance normalization scale, 0 = per-cluster maximum")
            ->capture_default_str();
        app.add_option("--max-iters", max_iters, "Lloyd iteration cap per layer")->capture_default_str();
        app.add_option("--tol", tol, "Stop when the changed-assignment fraction drops below this")
            ->capture_default_str();
        app.add_option("--seed", seed, "Training seed")->capture_default_str();
    }

    TrainConfig build() const {
        TrainConfig c;
        c.layer_sizes.clear();
        std::stringstream ss(k);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::uint32_t v = 0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
                fail("InvalidArgument", "--k entry '" + tok + "' is not a positive integer");
            }
            c.layer_sizes.push_back(v);
        }
        c.variant = parse_variant(variant);
        c.alpha = alpha;
        c.beta = beta;
        c.geo_attributes = AttributeSet::parse(attrs);
        c.rope_layer = parse_rope_layer(rope_layer);
        c.coord_frame = parse_coord_frame(coord_frame);
        c.d_scale_km = d_scale_km;
        c.max_iters = max_iters;
        c.tol = tol;
        c.seed = seed;
        c.validate();
        return c;
    }
};

enum class OutFormat { table, records };

OutFormat parse_format(const std::string& s) {
    if (s == "table") return OutFormat::table;
    if (s == "records") return OutFormat::records;
    fail("InvalidArgument", "--format must be table or records, got '" + s + "'");
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
    } else {
        write_text(out_path, text);
    }
}

std::string render(const std::vector<ReportRow>& rows, OutFormat f) {
    return f == OutFormat::table ? format_table(rows) : format_records(rows);
}

void report_diagnostics(const RunResult& r, std::ostream& err) {
    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    err << "trained " << r.config().label() << " in " << fixed(r.wall_seconds, 3) << " s\n";
}

SynthConfig synth_defaults() { return {}; }

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Proximity-aware semantic IDs for POIs"};
    app.name("geosid");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    ExecPolicy policy = ExecPolicy::parallel;
    bool serial = false;
    app.add_flag("--serial", serial, "Use the serial reference kernels instead of OpenMP");

    std::string format = "table";
    std::string out_path;
    std::string corpus_dir;
    std::string codebook_path;
    TrainFlags tf;

    // synth
    SynthConfig sc = synth_defaults();
    auto* synth = app.add_subcommand("synth", "Write a seeded synthetic corpus directory");
    synth->add_option("--out", out_path, "Output corpus directory")->required();
    synth->add_option("--seed", sc.seed, "Generator seed")->capture_default_str();
    synth->add_option("--clusters", sc.n_semantic_clusters, "Semantic clusters")->capture_default_str();
    synth->add_option("--per-cluster", sc.pois_per_cluster, "POIs per semantic cluster")->capture_default_str();
    synth->add_option("--subclusters", sc.geo_subclusters_per_semantic, "Geographic blobs per semantic cluster")
        ->capture_default_str();
    synth->add_option("--separation-km", sc.subcluster_separation_km, "Distance between adjacent blob centers")
        ->capture_default_str();
    synth->add_option("--spread-km", sc.subcluster_spread_km, "Per-axis std of POIs around a blob center")
        ->capture_default_str();
    synth->add_option("--dim", sc.embedding_dim, "Embedding dimension (even)")->capture_default_str();
    synth->add_option("--noise", sc.noise_std, "Embedding noise std")->capture_default_str();
    synth->add_option("--region-km", sc.region_radius_km, "Radius of the disc holding cluster anchors")
        ->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "Train a codebook and print its quantization report");
    train->add_option("--corpus", corpus_dir, "Corpus directory (pois.jsonl + embeddings.bin)")->required();
    train->add_option("--out", codebook_path, "Codebook artifact path")->required();
    train->add_option("--format", format, "table | records")->capture_default_str();
    tf.add_to(*train);

    // assign
    bool layer4 = false;
    auto* assign_cmd = app.add_subcommand("assign", "Assign SIDs to a corpus with a trained codebook");
    assign_cmd->add_option("--codebook", codebook_path, "Codebook artifact path")->required();
    assign_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    assign_cmd->add_option("--out", out_path, "Write assignments here instead of stdout");
    assign_cmd->add_option("--format", format, "table | records")->capture_default_str();
    assign_cmd->add_flag("--layer4", layer4, "Append a per-group ordinal that makes every SID unique");

    // report
    auto* report = app.add_subcommand("report", "Quantization report of a codebook");
    report->add_option("--codebook", codebook_path, "Codebook artifact path")->required();
    report->add_option("--corpus", corpus_dir, "Re-assign this corpus; default uses the stored index");
    report->add_option("--out", out_path, "Write the report here instead of stdout");
    report->add_option("--format", format, "table | records")->capture_default_str();

    // compare
    std::string variants = "pro_geo,rq_kmeans_euclidean,cosine_only,concat_geo,add_geo";
    bool attribute_rows = false;
    auto* compare_cmd = app.add_subcommand("compare", "Train several variants and tabulate their reports");
    compare_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    compare_cmd->add_option("--variants", variants, "Comma-separated variants, at least two")
        ->capture_default_str();
    compare_cmd->add_flag("--attribute-rows", attribute_rows,
                          "Compare the eight geo attribute combinations instead of variants");
    compare_cmd->add_option("--out", out_path, "Write the table here instead of stdout");
    compare_cmd->add_option("--format", format, "table | records")->capture_default_str();
    tf.add_to(*compare_cmd);

    // sweep
    std::string grid_text;
    auto* sweep = app.add_subcommand("sweep", "Pro-GEO over a grid of (alpha, beta) pairs");
    sweep->add_option("--corpus", corpus_dir, "Corpus directory")->required();
    sweep->add_option("--grid", grid_text, "Pairs as a:b,a:b,... (default: the eight-pair grid)");
    sweep->add_option("--out", out_path, "Write the table here instead of stdout");
    sweep->add_option("--format", format, "table | records")->capture_default_str();
    tf.add_to(*sweep);

    // verify-lemma
    std::size_t trials = 1000;
    std::size_t dim = 128;
    std::uint64_t vseed = 1;
    auto* verify = app.add_subcommand("verify-lemma", "Check the mirror inner-product and cosine-distance identities");
    verify->add_option("--trials", trials, "Random trials")->capture_default_str();
    verify->add_option("--dim", dim, "Vector dimension 2m (even)")->capture_default_str();
    verify->add_option("--seed", vseed, "Trial seed")->capture_default_str();

    // export-geojson
    auto* geojson = app.add_subcommand("export-geojson", "Write POIs with their SIDs as GeoJSON");
    geojson->add_option("--codebook", codebook_path, "Codebook artifact path")->required();
    geojson->add_option("--corpus", corpus_dir, "Re-assign this corpus; default uses the stored index");
    geojson->add_option("--out", out_path, "GeoJSON output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        out << sub->help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 1;
    }

    try {
        kernels::configure_threads_from_env();
        if (serial) policy = ExecPolicy::serial;
        const OutFormat fmt = parse_format(format);

        if (synth->parsed()) {
            const Corpus c = generate_synthetic(sc);
            save_corpus_dir(c, out_path);
            out << "wrote " << c.size() << " POIs (" << sc.n_semantic_clusters << " clusters x "
                << sc.geo_subclusters_per_semantic << " blobs, dim " << sc.embedding_dim << ") to " << out_path
                << "\n";
            return 0;
        }

        if (train->parsed()) {
            const TrainConfig cfg = tf.build();
            const Corpus c = load_corpus_dir(corpus_dir);
            const RunResult r = run(c, cfg, policy);
            save_codebook(r.artifact, codebook_path);
            report_diagnostics(r, err);
            out << render({{cfg.label(), cfg, r.report}}, fmt);
            return 0;
        }

        if (assign_cmd->parsed()) {
            const auto artifact = load_codebook(codebook_path);
            const Corpus c = load_corpus_dir(corpus_dir);
            const auto sids = assign_corpus(artifact, c, policy);
            std::vector<SidEntry> entries;
            for (std::size_t i = 0; i < c.size(); ++i) entries.push_back({c.pois[i].id, sids[i], c.pois[i].location});
            const SidIndex index(entries);
            const auto with_j4 = layer4 ? hard_code_layer4(index) : std::map<std::string, Sid>{};
            std::string text;
            for (const auto& e : index.entries()) {
                const Sid s = layer4 ? with_j4.at(e.poi_id) : e.sid;
                if (fmt == OutFormat::table) {
                    text += e.poi_id + "\t" + s.to_string() + "\n";
                } else {
                    nlohmann::ordered_json j;
                    j["id"] = e.poi_id;
                    j["j1"] = s.j1;
                    j["j2"] = s.j2;
                    j["j3"] = s.j3;
                    if (s.j4) j["j4"] = *s.j4;
                    j["sid"] = s.to_string();
                    text += j.dump() + "\n";
                }
            }
            emit(text, out_path, out);
            return 0;
        }

        auto index_entries = [&](const CodebookArtifact& artifact) {
            if (corpus_dir.empty()) return artifact.index.entries();
            const Corpus c = load_corpus_dir(corpus_dir);
            const auto sids = assign_corpus(artifact, c, policy);
            std::vector<SidEntry> entries;
            for (std::size_t i = 0; i < c.size(); ++i) entries.push_back({c.pois[i].id, sids[i], c.pois[i].location});
            return SidIndex(std::move(entries)).entries();
        };

        if (report->parsed()) {
            const auto artifact = load_codebook(codebook_path);
            const auto entries = index_entries(artifact);
            std::vector<Sid> sids;
            std::vector<GeoPoint> locs;
            for (const auto& e : entries) {
                sids.push_back(e.sid);
                locs.push_back(e.location);
            }
            const auto rep = quant_report(sids, locs, artifact.capacities());
            emit(render({{artifact.config.label(), artifact.config, rep}}, fmt), out_path, out);
            return 0;
        }

        if (compare_cmd->parsed()) {
            const TrainConfig base = tf.build();
            const Corpus c = load_corpus_dir(corpus_dir);
            std::vector<ReportRow> rows;
            if (attribute_rows) {
                rows = sweep_attributes(c, base, policy);
            } else {
                std::vector<TrainConfig> cfgs;
                std::stringstream ss(variants);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    TrainConfig cfg = base;
                    cfg.variant = parse_variant(tok);
                    cfgs.push_back(cfg);
                }
                if (cfgs.size() < 2) fail("InvalidArgument", "compare needs at least two variants");
                rows = compare(c, cfgs, policy);
            }
            emit(render(rows, fmt), out_path, out);
            return 0;
        }

        if (sweep->parsed()) {
            const TrainConfig base = tf.build();
            SweepGrid grid = default_sweep_grid();
            if (!grid_text.empty()) {
                grid.clear();
                std::stringstream ss(grid_text);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    const auto colon = tok.find(':');
                    if (colon == std::string::npos) fail("InvalidGrid", "grid entry '" + tok + "' is not a:b");
                    double a = 0.0;
                    double b = 0.0;
                    const auto ra = std::from_chars(tok.data(), tok.data() + colon, a);
                    const auto rb = std::from_chars(tok.data() + colon + 1, tok.data() + tok.size(), b);
                    if (ra.ec != std::errc() || ra.ptr != tok.data() + colon || rb.ec != std::errc() ||
                        rb.ptr != tok.data() + tok.size()) {
                        fail("InvalidGrid", "grid entry '" + tok + "' is not a:b");
                    }
                    grid.emplace_back(a, b);
                }
            }
            const Corpus c = load_corpus_dir(corpus_dir);
            emit(render(sweep_alpha_beta(c, grid, base, policy), fmt), out_path, out);
            return 0;
        }

        if (verify->parsed()) {
            if (dim == 0 || dim % 2 != 0) fail("OddDimension", "--dim must be even and positive");
            if (trials == 0) fail("InvalidArgument", "--trials must be at least 1");
            const double lemma = verify_mirror_identity(trials, dim / 2, vseed);
            const double ddcos = verify_delta_dcos(trials, dim / 2, vseed);
            char line[160];
            std::snprintf(line, sizeof line, "inner_product_identity max_rel_error %.3e\n", lemma);
            out << line;
            std::snprintf(line, sizeof line, "delta_dcos_identity    max_abs_error %.3e\n", ddcos);
            out << line;
            const bool ok = lemma <= 1e-9 && ddcos <= 1e-9;
            out << (ok ? "ok" : "FAILED") << " (tolerance 1e-9, " << trials << " trials, dim " << dim << ")\n";
            return ok ? 0 : 1;
        }

        if (geojson->parsed()) {
            const auto artifact = load_codebook(codebook_path);
            export_geojson(index_entries(artifact), out_path);
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::io ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace geosid
