#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "pathstab/csv.hpp"
#include "pathstab/geojson.hpp"
#include "pathstab/pipeline.hpp"
#include "pathstab/synthgraph.hpp"

namespace {

namespace fs = std::filesystem;
using namespace pathstab;

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
}

/// Cached canonical tables beat raw inputs so staged subcommands compose.
RoadNetwork load_network_for_stage(const PipelineConfig& cfg) {
    const auto nodes = out_path(cfg, "nodes.csv");
    const auto edges = out_path(cfg, "edges.csv");
    if (fs::exists(nodes) && fs::exists(edges)) {
        return load_network(nodes, edges, cfg.area_km2);
    }
    return stage_ingest(cfg);
}

std::string require_artifact(const PipelineConfig& cfg, const std::string& name,
                             const std::string& producer) {
    const auto path = out_path(cfg, name);
    if (!fs::exists(path)) {
        throw std::runtime_error("missing " + path + "; run the '" + producer +
                                 "' stage first");
    }
    return path;
}

// Config keys accepted both in the config file and as --<key> flags.
constexpr const char* kConfigKeys[] = {
    "city",          "nodes_csv",      "edges_csv",       "graphml",
    "od_pairs_csv",  "area_km2",       "center_lat",      "center_lon",
    "r_min_km",      "r_max_km",       "r_step_km",       "n_points",
    "match_threshold_m", "delta_min_m", "delta_max_m",    "k_sectors",
    "filter_percentile", "abs_ratio_threshold", "out_dir", "seed",
    "workers"};

std::string dashed(std::string key) {
    for (auto& c : key) {
        if (c == '_') c = '-';
    }
    return key;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shortest-path stability of road networks under destination perturbation"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Key=value configuration file")
        ->check(CLI::ExistingFile);

    std::map<std::string, std::string> flag_values;
    for (const auto* key : kConfigKeys) {
        const std::string names = "--" + std::string(key) + ",--" + dashed(key);
        app.add_option(names, flag_values[key], "Config key " + std::string(key));
    }

    auto* cmd_ingest = app.add_subcommand("ingest", "Load and validate the network, cache canonical tables");
    auto* cmd_sample = app.add_subcommand("sample", "Generate radial OD pairs");
    auto* cmd_perturb = app.add_subcommand("perturb", "Select perturbed destinations, compute deviations, filter");
    auto* cmd_stability = app.add_subcommand("stability", "Compute per-OD and per-destination stability");
    auto* cmd_metrics = app.add_subcommand("metrics", "Compute network structure metrics");
    auto* cmd_analyze = app.add_subcommand("analyze", "Summarize stability and fit the radius trend");
    auto* cmd_map = app.add_subcommand("map", "Export the destination stability map as GeoJSON");
    auto* cmd_run = app.add_subcommand("run", "Run the full pipeline");
    auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic network");

    double map_low = 0.20, map_high = 0.80;
    cmd_map->add_option("--low-pct", map_low, "Lower percentile for the unstable class");
    cmd_map->add_option("--high-pct", map_high, "Upper percentile for the stable class");

    std::string synth_kind = "grid";
    double synth_extent_km = 1.0, synth_spacing_m = 100.0, synth_one_way = 0.0;
    cmd_synth->add_option("--kind", synth_kind, "grid, radial or organic")
        ->check(CLI::IsMember({"grid", "radial", "organic"}));
    cmd_synth->add_option("--extent-km", synth_extent_km, "Half-pattern extent in km");
    cmd_synth->add_option("--spacing-m", synth_spacing_m, "Node spacing in meters");
    cmd_synth->add_option("--one-way-fraction", synth_one_way, "Fraction of one-way adjacencies");

    // Clustering inputs are optional extras of analyze: a multi-city feature
    // table in the Q6 feature order.
    std::string cluster_features;
    std::size_t cluster_k = 4;
    std::size_t elbow_k_max = 0;
    cmd_analyze->add_option("--cluster-features", cluster_features,
                            "CSV city,median_deviation_m,ratio_R,avg_street_length_m,"
                            "std_street_length_m,avg_circuity,bearing_entropy");
    cmd_analyze->add_option("--k", cluster_k, "Cluster count for --cluster-features");
    cmd_analyze->add_option("--elbow-k-max", elbow_k_max,
                            "Also emit elbow.csv for k=1..k_max (0 = skip)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = parse_config_file(config_path);
        for (const auto* key : kConfigKeys) {
            const auto it = flag_values.find(key);
            if (it != flag_values.end() && !it->second.empty()) {
                apply_config_entry(cfg, key, it->second, "<cli>");
            }
        }

        if (cmd_ingest->parsed()) {
            const auto net = stage_ingest(cfg);
            std::cout << "ingest: " << net.node_count() << " nodes, " << net.edge_count()
                      << " edges -> " << cfg.out_dir << "\n";
        } else if (cmd_sample->parsed()) {
            const auto net = load_network_for_stage(cfg);
            const auto pairs = stage_sample(cfg, net);
            std::cout << "sample: " << pairs.size() << " OD pairs\n";
        } else if (cmd_perturb->parsed()) {
            const auto net = load_network_for_stage(cfg);
            const auto pairs =
                read_od_pairs_csv(require_artifact(cfg, "od_pairs.csv", "sample"), net);
            const auto out = stage_perturb(cfg, net, pairs);
            std::cout << "perturb: " << out.n_entries << " entries over " << out.n_destinations
                      << " destinations, threshold " << out.filtered.threshold_ratio << "\n";
        } else if (cmd_stability->parsed()) {
            const auto net = load_network_for_stage(cfg);
            const auto pairs =
                read_od_pairs_csv(require_artifact(cfg, "od_pairs.csv", "sample"), net);
            const auto sets = read_perturbations_csv(
                require_artifact(cfg, "filtered_perturbations.csv", "perturb"), net);
            const auto out = stage_stability(cfg, net, pairs, sets);
            std::cout << "stability: " << out.records.size() << " records, " << out.n_excluded
                      << " excluded\n";
        } else if (cmd_metrics->parsed()) {
            const auto net = load_network_for_stage(cfg);
            const auto m = stage_metrics(cfg, net);
            std::cout << "metrics: avg street " << m.avg_street_length_m << " m, entropy "
                      << m.bearing_entropy << "\n";
        } else if (cmd_analyze->parsed()) {
            if (!cluster_features.empty()) {
                const auto t = csv::read_file(cluster_features);
                const std::vector<std::string> expect{
                    "city",          "median_deviation_m",  "ratio_R", "avg_street_length_m",
                    "std_street_length_m", "avg_circuity",  "bearing_entropy"};
                if (t.header != expect) {
                    throw std::runtime_error(cluster_features + ": unexpected feature header");
                }
                std::vector<std::string> cities;
                std::vector<std::vector<double>> rows;
                for (std::size_t i = 0; i < t.rows.size(); ++i) {
                    const auto& r = t.rows[i];
                    if (r.size() != expect.size()) {
                        throw std::runtime_error(cluster_features + ":" +
                                                 std::to_string(t.line_numbers[i]) +
                                                 ": expected " + std::to_string(expect.size()) +
                                                 " fields");
                    }
                    cities.push_back(r[0]);
                    std::vector<double> feat;
                    for (std::size_t j = 1; j < r.size(); ++j) {
                        const auto v = csv::parse_double(r[j]);
                        if (!v) {
                            throw std::runtime_error(cluster_features + ":" +
                                                     std::to_string(t.line_numbers[i]) +
                                                     ": invalid number \"" + r[j] + "\"");
                        }
                        feat.push_back(*v);
                    }
                    rows.push_back(std::move(feat));
                }
                const std::vector<std::string> feature_names(expect.begin() + 1, expect.end());
                const auto standardized = zscore(rows, feature_names);
                const auto clusters = kmeans(standardized, cluster_k, cfg.seed);
                std::vector<std::vector<std::string>> out_rows;
                for (std::size_t i = 0; i < cities.size(); ++i) {
                    out_rows.push_back({cities[i], std::to_string(clusters.assignments[i])});
                }
                fs::create_directories(cfg.out_dir);
                csv::write_file(out_path(cfg, "clusters.csv"), {"city", "cluster_id"}, out_rows);
                std::cout << "analyze: clustered " << cities.size() << " cities into "
                          << clusters.k << " clusters (wcss " << clusters.wcss << ")\n";
                if (elbow_k_max > 0) {
                    const auto curve = elbow_curve(standardized, elbow_k_max, cfg.seed);
                    std::vector<std::vector<std::string>> elbow_rows;
                    for (const auto& [k, wcss] : curve) {
                        elbow_rows.push_back({std::to_string(k), csv::format_double(wcss)});
                    }
                    csv::write_file(out_path(cfg, "elbow.csv"), {"k", "wcss"}, elbow_rows);
                }
            } else {
                const auto net = load_network_for_stage(cfg);
                const auto records =
                    read_od_records_csv(require_artifact(cfg, "od_records.csv", "stability"), net);
                std::optional<double> threshold;
                const auto filter_json = out_path(cfg, "filter.json");
                if (fs::exists(filter_json)) {
                    std::ifstream in(filter_json);
                    const auto fj = nlohmann::json::parse(in);
                    if (fj.contains("threshold_ratio")) {
                        threshold = fj["threshold_ratio"].get<double>();
                    }
                }
                const auto out = stage_analyze(cfg, records, threshold);
                std::cout << "analyze: median stability " << out.summary.stability.median << "\n";
            }
        } else if (cmd_map->parsed()) {
            const auto points =
                read_destination_csv(require_artifact(cfg, "destination_stability.csv",
                                                      "stability"));
            const auto doc = export_stability_map(points, map_low, map_high);
            fs::create_directories(cfg.out_dir);
            std::ofstream out(out_path(cfg, "stability_map.geojson"), std::ios::binary);
            if (!out) throw std::runtime_error("cannot write stability_map.geojson");
            out << doc;
            std::cout << "map: " << points.size() << " destinations -> stability_map.geojson\n";
        } else if (cmd_run->parsed()) {
            run_pipeline(cfg, &std::cout);
        } else if (cmd_synth->parsed()) {
            SynthSpec spec;
            spec.kind = synth_kind == "grid"     ? SynthKind::grid
                        : synth_kind == "radial" ? SynthKind::radial
                                                 : SynthKind::organic;
            spec.extent_km = synth_extent_km;
            spec.spacing_m = synth_spacing_m;
            spec.one_way_fraction = synth_one_way;
            spec.seed = cfg.seed;
            spec.center = GeoPoint{cfg.center_lat.value_or(0.0), cfg.center_lon.value_or(0.0)};
            const auto tables = generate_tables(spec);

            fs::create_directories(cfg.out_dir);
            std::vector<std::vector<std::string>> node_rows;
            for (const auto& n : tables.nodes) {
                node_rows.push_back(
                    {n.id, csv::format_double(n.lat), csv::format_double(n.lon)});
            }
            csv::write_file(out_path(cfg, "nodes.csv"), {"node_id", "lat", "lon"}, node_rows);
            std::vector<std::vector<std::string>> edge_rows;
            for (const auto& e : tables.edges) {
                edge_rows.push_back({e.id, e.u, e.v, csv::format_double(e.length_m)});
            }
            csv::write_file(out_path(cfg, "edges.csv"), {"edge_id", "u", "v", "length_m"},
                            edge_rows);

            nlohmann::ordered_json meta;
            meta["kind"] = synth_kind;
            meta["extent_km"] = spec.extent_km;
            meta["spacing_m"] = spec.spacing_m;
            meta["seed"] = spec.seed;
            meta["one_way_fraction"] = spec.one_way_fraction;
            meta["area_km2"] = tables.area_km2;
            meta["n_nodes"] = tables.nodes.size();
            meta["n_edges"] = tables.edges.size();
            std::ofstream meta_out(out_path(cfg, "synth_meta.json"), std::ios::binary);
            meta_out << meta.dump(2) << "\n";
            std::cout << "synth: " << tables.nodes.size() << " nodes, " << tables.edges.size()
                      << " edges, area " << tables.area_km2 << " km2\n";
        }
    } catch (const StageError& e) {
        std::cerr << "error " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
