#include "pathstab/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"

#include "pathstab/csv.hpp"
#include "pathstab/routing.hpp"

namespace pathstab {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void stage_fail(const std::string& stage, const std::string& msg) {
    throw StageError(stage, msg);
}

template <typename Fn>
auto guarded(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir, const std::string& stage) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) stage_fail(stage, "cannot create output directory " + dir + ": " + ec.message());
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

/// Index-sharded parallel map; fn(i) must only touch slot i of its outputs.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    workers = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

std::string trimmed(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

double require_double(std::string_view value, std::string_view key, const std::string& where) {
    const auto v = csv::parse_double(value);
    if (!v) {
        throw std::runtime_error(where + ": invalid number for " + std::string(key) + ": \"" +
                                 std::string(value) + "\"");
    }
    return *v;
}

std::size_t require_count(std::string_view value, std::string_view key, const std::string& where) {
    const auto v = csv::parse_int(value);
    if (!v || *v < 1) {
        throw std::runtime_error(where + ": " + std::string(key) +
                                 " must be a positive integer, got \"" + std::string(value) + "\"");
    }
    return static_cast<std::size_t>(*v);
}

ordered_json json_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

}  // namespace

SamplingConfig PipelineConfig::sampling_config() const {
    if (!center_lat || !center_lon) {
        throw std::runtime_error("config: center_lat and center_lon are required for sampling");
    }
    SamplingConfig s;
    s.center = GeoPoint{*center_lat, *center_lon};
    s.r_min_km = r_min_km;
    s.r_max_km = r_max_km;
    s.r_step_km = r_step_km;
    s.n_points = n_points;
    s.match_threshold_m = match_threshold_m;
    return s;
}

void apply_config_entry(PipelineConfig& cfg, std::string_view key, std::string_view value,
                        const std::string& where) {
    const std::string val = trimmed(value);
    if (key == "city") {
        cfg.city = val;
    } else if (key == "nodes_csv") {
        cfg.nodes_csv = val;
    } else if (key == "edges_csv") {
        cfg.edges_csv = val;
    } else if (key == "graphml") {
        cfg.graphml = val;
    } else if (key == "od_pairs_csv") {
        cfg.od_pairs_csv = val;
    } else if (key == "out_dir") {
        cfg.out_dir = val;
    } else if (key == "area_km2") {
        cfg.area_km2 = require_double(val, key, where);
    } else if (key == "center_lat") {
        cfg.center_lat = require_double(val, key, where);
    } else if (key == "center_lon") {
        cfg.center_lon = require_double(val, key, where);
    } else if (key == "r_min_km") {
        cfg.r_min_km = require_double(val, key, where);
    } else if (key == "r_max_km") {
        cfg.r_max_km = require_double(val, key, where);
    } else if (key == "r_step_km") {
        cfg.r_step_km = require_double(val, key, where);
    } else if (key == "n_points") {
        cfg.n_points = require_count(val, key, where);
    } else if (key == "match_threshold_m") {
        cfg.match_threshold_m = require_double(val, key, where);
    } else if (key == "delta_min_m") {
        cfg.perturbation.delta_min_m = require_double(val, key, where);
    } else if (key == "delta_max_m") {
        cfg.perturbation.delta_max_m = require_double(val, key, where);
    } else if (key == "k_sectors") {
        cfg.perturbation.k_sectors = require_count(val, key, where);
    } else if (key == "filter_percentile") {
        cfg.perturbation.filter_percentile = require_double(val, key, where);
    } else if (key == "abs_ratio_threshold") {
        cfg.abs_ratio_threshold = require_double(val, key, where);
    } else if (key == "seed") {
        const auto v = csv::parse_int(val);
        if (!v || *v < 0) {
            throw std::runtime_error(where + ": seed must be a non-negative integer");
        }
        cfg.seed = static_cast<std::uint64_t>(*v);
    } else if (key == "workers") {
        cfg.workers = require_count(val, key, where);
    } else {
        throw std::runtime_error(where + ": unknown config key \"" + std::string(key) + "\"");
    }
}

PipelineConfig parse_config_text(std::string_view text, const std::string& source) {
    PipelineConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const std::string line = trimmed(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        const std::string where = source + ":" + std::to_string(line_no);
        if (eq == std::string::npos) {
            throw std::runtime_error(where + ": expected key=value, got \"" + line + "\"");
        }
        const std::string key = trimmed(std::string_view(line).substr(0, eq));
        if (key.empty()) throw std::runtime_error(where + ": empty config key");
        apply_config_entry(cfg, key, std::string_view(line).substr(eq + 1), where);
    }
    return cfg;
}

PipelineConfig parse_config_file(const std::string& path) {
    return parse_config_text(read_file_bytes(path), path);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

void write_od_pairs_csv(const std::string& path, const RoadNetwork& net,
                        std::span<const ODPair> pairs) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) {
        rows.push_back({net.node_id(p.origin), net.node_id(p.destination),
                        csv::format_double(p.radius_km), csv::format_double(p.origin_azimuth_deg),
                        csv::format_double(p.dest_azimuth_deg)});
    }
    csv::write_file(path,
                    {"origin", "destination", "radius_km", "origin_azimuth_deg",
                     "dest_azimuth_deg"},
                    rows);
}

std::vector<ODPair> read_od_pairs_csv(const std::string& path, const RoadNetwork& net) {
    const auto t = csv::read_file(path);
    const std::vector<std::string> expect{"origin", "destination", "radius_km",
                                          "origin_azimuth_deg", "dest_azimuth_deg"};
    if (t.header != expect) {
        throw std::runtime_error(path + ": unexpected OD pair header");
    }
    std::vector<ODPair> pairs;
    pairs.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = path + ":" + std::to_string(t.line_numbers[i]);
        if (r.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
        ODPair p;
        p.origin = net.require_node(r[0]);
        p.destination = net.require_node(r[1]);
        if (p.origin == p.destination) {
            throw std::runtime_error(where + ": origin equals destination");
        }
        const auto radius = csv::parse_double(r[2]);
        const auto az_o = csv::parse_double(r[3]);
        const auto az_d = csv::parse_double(r[4]);
        if (!radius || !az_o || !az_d) throw std::runtime_error(where + ": invalid number");
        p.radius_km = *radius;
        p.origin_azimuth_deg = *az_o;
        p.dest_azimuth_deg = *az_d;
        pairs.push_back(p);
    }
    return pairs;
}

void write_perturbations_csv(const std::string& path, const RoadNetwork& net,
                             std::span<const PerturbationSet> sets) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& set : sets) {
        for (const auto& e : set.perturbed) {
            rows.push_back({net.node_id(set.original), std::to_string(e.sector),
                            net.node_id(e.node),
                            e.deviation.length_m ? csv::format_double(*e.deviation.length_m) : "",
                            e.deviation.ratio ? csv::format_double(*e.deviation.ratio) : ""});
        }
    }
    csv::write_file(path, {"destination", "sector", "node", "deviation_length_m",
                           "deviation_ratio"},
                    rows);
}

std::vector<PerturbationSet> read_perturbations_csv(const std::string& path,
                                                    const RoadNetwork& net) {
    const auto t = csv::read_file(path);
    const std::vector<std::string> expect{"destination", "sector", "node", "deviation_length_m",
                                          "deviation_ratio"};
    if (t.header != expect) {
        throw std::runtime_error(path + ": unexpected perturbation header");
    }
    std::map<NodeIndex, PerturbationSet> by_dest;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = path + ":" + std::to_string(t.line_numbers[i]);
        if (r.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
        const NodeIndex dest = net.require_node(r[0]);
        const auto sector = csv::parse_int(r[1]);
        if (!sector || *sector < 0) throw std::runtime_error(where + ": invalid sector");
        PerturbationEntry entry;
        entry.sector = static_cast<std::size_t>(*sector);
        entry.node = net.require_node(r[2]);
        if (r[3].empty() != r[4].empty()) {
            throw std::runtime_error(where + ": deviation length and ratio must both be set");
        }
        if (!r[3].empty()) {
            const auto len = csv::parse_double(r[3]);
            const auto ratio = csv::parse_double(r[4]);
            if (!len || !ratio) throw std::runtime_error(where + ": invalid deviation");
            entry.deviation.length_m = *len;
            entry.deviation.ratio = *ratio;
        }
        auto& set = by_dest[dest];
        set.original = dest;
        set.perturbed.push_back(entry);
    }
    std::vector<PerturbationSet> sets;
    sets.reserve(by_dest.size());
    for (auto& [dest, set] : by_dest) sets.push_back(std::move(set));
    return sets;
}

void write_od_records_csv(const std::string& path, const RoadNetwork& net,
                          std::span<const StabilityRecord> records) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        rows.push_back({net.node_id(r.od.origin), net.node_id(r.od.destination),
                        csv::format_double(r.od.radius_km), csv::format_double(r.stability),
                        std::to_string(r.jaccards.size()),
                        csv::format_double(r.original_path_length_m),
                        csv::format_double(r.median_deviation_m), csv::format_double(r.ratio_R)});
    }
    csv::write_file(path,
                    {"origin", "destination", "radius_km", "stability", "n_perturbations",
                     "original_length_m", "median_deviation_m", "ratio_R"},
                    rows);
}

std::vector<StabilityRecord> read_od_records_csv(const std::string& path,
                                                 const RoadNetwork& net) {
    const auto t = csv::read_file(path);
    const std::vector<std::string> expect{"origin",           "destination",
                                          "radius_km",        "stability",
                                          "n_perturbations",  "original_length_m",
                                          "median_deviation_m", "ratio_R"};
    if (t.header != expect) {
        throw std::runtime_error(path + ": unexpected stability record header");
    }
    std::vector<StabilityRecord> records;
    records.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = path + ":" + std::to_string(t.line_numbers[i]);
        if (r.size() != 8) throw std::runtime_error(where + ": expected 8 fields");
        StabilityRecord rec;
        rec.od.origin = net.require_node(r[0]);
        rec.od.destination = net.require_node(r[1]);
        const auto radius = csv::parse_double(r[2]);
        const auto stab = csv::parse_double(r[3]);
        const auto orig = csv::parse_double(r[5]);
        const auto med = csv::parse_double(r[6]);
        const auto ratio = csv::parse_double(r[7]);
        if (!radius || !stab || !orig || !med || !ratio) {
            throw std::runtime_error(where + ": invalid number");
        }
        rec.od.radius_km = *radius;
        rec.stability = *stab;
        rec.original_path_length_m = *orig;
        rec.median_deviation_m = *med;
        rec.ratio_R = *ratio;
        records.push_back(std::move(rec));
    }
    return records;
}

void write_destination_csv(const std::string& path, const RoadNetwork& net,
                           std::span<const DestinationStability> destinations) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(destinations.size());
    for (const auto& d : destinations) {
        const auto& p = net.node_point(d.node);
        rows.push_back({net.node_id(d.node), csv::format_double(p.lat), csv::format_double(p.lon),
                        csv::format_double(d.stability), std::to_string(d.n_origins)});
    }
    csv::write_file(path, {"node_id", "lat", "lon", "stability", "n_origins"}, rows);
}

std::vector<MapPoint> read_destination_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const std::vector<std::string> expect{"node_id", "lat", "lon", "stability", "n_origins"};
    if (t.header != expect) {
        throw std::runtime_error(path + ": unexpected destination stability header");
    }
    std::vector<MapPoint> points;
    points.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const std::string where = path + ":" + std::to_string(t.line_numbers[i]);
        if (r.size() != 5) throw std::runtime_error(where + ": expected 5 fields");
        const auto lat = csv::parse_double(r[1]);
        const auto lon = csv::parse_double(r[2]);
        const auto stab = csv::parse_double(r[3]);
        const auto n = csv::parse_int(r[4]);
        if (!lat || !lon || !stab || !n || *n < 0) {
            throw std::runtime_error(where + ": invalid number");
        }
        points.push_back(MapPoint{r[0], *lat, *lon, *stab, static_cast<std::size_t>(*n)});
    }
    return points;
}

RoadNetwork stage_ingest(const PipelineConfig& cfg) {
    return guarded("ingest", [&]() -> RoadNetwork {
        const bool has_csv = !cfg.nodes_csv.empty() || !cfg.edges_csv.empty();
        if (!cfg.graphml.empty() && has_csv) {
            throw std::runtime_error("specify either graphml or nodes_csv/edges_csv, not both");
        }
        RoadNetwork net = [&] {
            if (!cfg.graphml.empty()) return load_graphml(cfg.graphml, cfg.area_km2);
            if (cfg.nodes_csv.empty() || cfg.edges_csv.empty()) {
                throw std::runtime_error("no input network: set nodes_csv and edges_csv, or graphml");
            }
            return load_network(cfg.nodes_csv, cfg.edges_csv, cfg.area_km2);
        }();
        ensure_out_dir(cfg.out_dir, "ingest");
        write_network_csv(net, join_path(cfg.out_dir, "nodes.csv"),
                          join_path(cfg.out_dir, "edges.csv"));
        return net;
    });
}

std::vector<ODPair> stage_sample(const PipelineConfig& cfg, const RoadNetwork& net) {
    return guarded("sample", [&] {
        std::vector<ODPair> pairs = cfg.od_pairs_csv.empty()
                                        ? generate_od_pairs(net, cfg.sampling_config())
                                        : read_od_pairs_csv(cfg.od_pairs_csv, net);
        ensure_out_dir(cfg.out_dir, "sample");
        write_od_pairs_csv(join_path(cfg.out_dir, "od_pairs.csv"), net, pairs);
        return pairs;
    });
}

PerturbOutputs stage_perturb(const PipelineConfig& cfg, const RoadNetwork& net,
                             std::span<const ODPair> pairs) {
    PerturbOutputs out;
    std::vector<PerturbationSet> sets = guarded("perturb", [&] {
        validate(cfg.perturbation);
        std::vector<NodeIndex> dests;
        dests.reserve(pairs.size());
        for (const auto& p : pairs) dests.push_back(p.destination);
        std::sort(dests.begin(), dests.end());
        dests.erase(std::unique(dests.begin(), dests.end()), dests.end());

        std::vector<PerturbationSet> result(dests.size());
        parallel_for(dests.size(), cfg.workers, [&](std::size_t i) {
            auto set = select_perturbed_destinations(net, dests[i], cfg.perturbation);
            compute_deviations(net, set, cfg.perturbation);
            result[i] = std::move(set);
        });
        ensure_out_dir(cfg.out_dir, "perturb");
        write_perturbations_csv(join_path(cfg.out_dir, "perturbations.csv"), net, result);
        return result;
    });

    out.n_destinations = sets.size();
    for (const auto& s : sets) {
        out.n_entries += s.perturbed.size();
        for (const auto& e : s.perturbed) {
            if (!e.deviation.ratio) out.n_unreachable++;
        }
    }

    guarded("filter", [&] {
        out.percentile_mode = !cfg.abs_ratio_threshold.has_value();
        out.filtered = out.percentile_mode
                           ? filter_abnormal(std::move(sets), cfg.perturbation.filter_percentile)
                           : filter_with_threshold(std::move(sets), *cfg.abs_ratio_threshold);
        write_perturbations_csv(join_path(cfg.out_dir, "filtered_perturbations.csv"), net,
                                out.filtered.sets);

        std::size_t n_retained = 0;
        for (const auto& s : out.filtered.sets) n_retained += s.perturbed.size();
        ordered_json fj;
        fj["mode"] = out.percentile_mode ? "percentile" : "absolute";
        fj["threshold_ratio"] = out.filtered.threshold_ratio;
        fj["n_removed_abnormal"] = out.filtered.n_removed_abnormal;
        fj["n_removed_unreachable"] = out.filtered.n_removed_unreachable;
        fj["n_retained"] = n_retained;
        write_text_file(join_path(cfg.out_dir, "filter.json"), fj.dump(2) + "\n");
        return 0;
    });
    return out;
}

StabilityOutputs stage_stability(const PipelineConfig& cfg, const RoadNetwork& net,
                                 std::span<const ODPair> pairs,
                                 std::span<const PerturbationSet> filtered_sets) {
    return guarded("stability", [&] {
        std::vector<const PerturbationSet*> by_node(net.node_count(), nullptr);
        for (const auto& s : filtered_sets) by_node[s.original] = &s;

        std::map<NodeIndex, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < pairs.size(); ++i) groups[pairs[i].origin].push_back(i);
        std::vector<std::pair<NodeIndex, std::vector<std::size_t>>> group_list(groups.begin(),
                                                                               groups.end());

        std::vector<std::optional<StabilityRecord>> results(pairs.size());
        parallel_for(group_list.size(), cfg.workers, [&](std::size_t gi) {
            const auto& [origin, idxs] = group_list[gi];
            std::vector<NodeIndex> targets;
            for (const auto i : idxs) {
                targets.push_back(pairs[i].destination);
                if (const auto* ps = by_node[pairs[i].destination]) {
                    for (const auto& e : ps->perturbed) targets.push_back(e.node);
                }
            }
            const ShortestPathTree tree(net, origin, targets);
            for (const auto i : idxs) {
                const auto* ps = by_node[pairs[i].destination];
                PerturbationSet empty;
                if (!ps) {
                    empty.original = pairs[i].destination;
                    ps = &empty;
                }
                results[i] = od_stability(net, pairs[i], *ps, tree);
            }
        });

        StabilityOutputs out;
        out.records.reserve(pairs.size());
        for (auto& r : results) {
            if (r) {
                out.records.push_back(std::move(*r));
            } else {
                out.n_excluded++;
            }
        }
        out.destinations = destination_stabilities(out.records);

        ensure_out_dir(cfg.out_dir, "stability");
        write_od_records_csv(join_path(cfg.out_dir, "od_records.csv"), net, out.records);
        write_destination_csv(join_path(cfg.out_dir, "destination_stability.csv"), net,
                              out.destinations);
        return out;
    });
}

CityMetrics stage_metrics(const PipelineConfig& cfg, const RoadNetwork& net) {
    return guarded("metrics", [&] {
        const CityMetrics m = compute_city_metrics(net);
        ensure_out_dir(cfg.out_dir, "metrics");
        csv::write_file(join_path(cfg.out_dir, "metrics.csv"),
                        {"city", "avg_street_length_m", "std_street_length_m", "avg_circuity",
                         "bearing_entropy", "intersection_density", "road_density",
                         "total_road_length_km"},
                        {{cfg.city, csv::format_double(m.avg_street_length_m),
                          csv::format_double(m.std_street_length_m),
                          csv::format_double(m.avg_circuity), csv::format_double(m.bearing_entropy),
                          csv::format_double(m.intersection_density_per_km2),
                          csv::format_double(m.road_density_km_per_km2),
                          csv::format_double(m.total_road_length_km)}});
        return m;
    });
}

AnalyzeOutputs stage_analyze(const PipelineConfig& cfg, std::span<const StabilityRecord> records,
                             std::optional<double> filter_threshold) {
    return guarded("analyze", [&] {
        AnalyzeOutputs out;
        out.summary = city_summary(records, filter_threshold);
        ensure_out_dir(cfg.out_dir, "analyze");

        std::vector<std::vector<std::string>> radius_rows;
        std::vector<double> xs, ys;
        for (const auto& [radius, median] : out.summary.median_by_radius_km) {
            radius_rows.push_back({csv::format_double(radius), csv::format_double(median)});
            xs.push_back(radius);
            ys.push_back(median);
        }
        csv::write_file(join_path(cfg.out_dir, "radius_medians.csv"),
                        {"radius_km", "median_stability"}, radius_rows);

        if (xs.size() >= 4) {
            out.fit = fit_exponential(xs, ys);
            csv::write_file(join_path(cfg.out_dir, "fit_report.csv"),
                            {"a", "b", "c", "r_squared"},
                            {{csv::format_double(out.fit->a), csv::format_double(out.fit->b),
                              csv::format_double(out.fit->c),
                              csv::format_double(out.fit->r_squared)}});
        }

        ordered_json sj;
        sj["city"] = cfg.city;
        sj["n_records"] = out.summary.stability.count;
        sj["stability"] = {{"median", out.summary.stability.median},
                           {"q1", out.summary.stability.q1},
                           {"q3", out.summary.stability.q3},
                           {"iqr", out.summary.stability.iqr},
                           {"min", out.summary.stability.min},
                           {"max", out.summary.stability.max},
                           {"count", out.summary.stability.count}};
        auto medians = ordered_json::object();
        for (const auto& [radius, median] : out.summary.median_by_radius_km) {
            medians[csv::format_double(radius)] = median;
        }
        sj["median_by_radius_km"] = medians;
        sj["filter_threshold"] =
            filter_threshold ? ordered_json(*filter_threshold) : ordered_json(nullptr);
        sj["median_deviation_pooled_m"] = json_or_null(out.summary.median_deviation_pooled_m);
        sj["median_deviation_of_record_medians_m"] =
            json_or_null(out.summary.median_deviation_of_record_medians_m);
        sj["n_destinations"] = out.summary.destinations.size();
        if (out.fit) {
            sj["fit"] = {{"a", out.fit->a},
                         {"b", out.fit->b},
                         {"c", out.fit->c},
                         {"r_squared", out.fit->r_squared},
                         {"degenerate", out.fit->degenerate}};
        } else {
            sj["fit"] = nullptr;
        }
        write_text_file(join_path(cfg.out_dir, "summary.json"), sj.dump(2) + "\n");
        return out;
    });
}

namespace {

ordered_json config_echo(const PipelineConfig& cfg) {
    // out_dir and workers are intentionally omitted: outputs must be
    // byte-identical across directories and worker counts.
    ordered_json j;
    j["city"] = cfg.city;
    j["nodes_csv"] = cfg.nodes_csv;
    j["edges_csv"] = cfg.edges_csv;
    j["graphml"] = cfg.graphml;
    j["od_pairs_csv"] = cfg.od_pairs_csv;
    j["area_km2"] = cfg.area_km2 ? ordered_json(*cfg.area_km2) : ordered_json(nullptr);
    j["center_lat"] = cfg.center_lat ? ordered_json(*cfg.center_lat) : ordered_json(nullptr);
    j["center_lon"] = cfg.center_lon ? ordered_json(*cfg.center_lon) : ordered_json(nullptr);
    j["r_min_km"] = cfg.r_min_km;
    j["r_max_km"] = cfg.r_max_km;
    j["r_step_km"] = cfg.r_step_km;
    j["n_points"] = cfg.n_points;
    j["match_threshold_m"] = cfg.match_threshold_m;
    j["delta_min_m"] = cfg.perturbation.delta_min_m;
    j["delta_max_m"] = cfg.perturbation.delta_max_m;
    j["k_sectors"] = cfg.perturbation.k_sectors;
    j["filter_percentile"] = cfg.perturbation.filter_percentile;
    j["abs_ratio_threshold"] =
        cfg.abs_ratio_threshold ? ordered_json(*cfg.abs_ratio_threshold) : ordered_json(nullptr);
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace

void run_pipeline(const PipelineConfig& cfg, std::ostream* progress) {
    const auto log = [&](const std::string& line) {
        if (progress) *progress << line << "\n";
    };

    ordered_json manifest;
    manifest["config"] = config_echo(cfg);
    manifest["seed"] = cfg.seed;
    auto stages = ordered_json::object();

    const RoadNetwork net = stage_ingest(cfg);
    stages["ingest"] = {{"n_nodes", net.node_count()}, {"n_edges", net.edge_count()}};
    log("ingest: " + std::to_string(net.node_count()) + " nodes, " +
        std::to_string(net.edge_count()) + " edges");

    const auto pairs = stage_sample(cfg, net);
    stages["sample"] = {{"n_pairs", pairs.size()},
                        {"mode", cfg.od_pairs_csv.empty() ? "radial" : "explicit"}};
    log("sample: " + std::to_string(pairs.size()) + " OD pairs");

    const auto pout = stage_perturb(cfg, net, pairs);
    std::size_t n_retained = 0;
    double max_retained = -1.0;
    for (const auto& s : pout.filtered.sets) {
        n_retained += s.perturbed.size();
        for (const auto& e : s.perturbed) {
            if (e.deviation.ratio) max_retained = std::max(max_retained, *e.deviation.ratio);
        }
    }
    if (max_retained > pout.filtered.threshold_ratio) {
        stage_fail("filter", "internal error: retained ratio exceeds threshold");
    }
    stages["perturb"] = {{"n_destinations", pout.n_destinations},
                         {"n_entries", pout.n_entries},
                         {"n_unreachable", pout.n_unreachable}};
    stages["filter"] = {
        {"mode", pout.percentile_mode ? "percentile" : "absolute"},
        {"threshold_ratio", pout.filtered.threshold_ratio},
        {"n_removed_abnormal", pout.filtered.n_removed_abnormal},
        {"n_removed_unreachable", pout.filtered.n_removed_unreachable},
        {"n_removed", pout.filtered.n_removed_abnormal + pout.filtered.n_removed_unreachable},
        {"n_retained", n_retained},
        {"max_retained_ratio", max_retained >= 0.0 ? ordered_json(max_retained) : ordered_json(nullptr)},
        {"retained_ratios_ok", true}};
    log("perturb: " + std::to_string(pout.n_entries) + " entries, filter threshold " +
        csv::format_double(pout.filtered.threshold_ratio));

    const auto sout = stage_stability(cfg, net, pairs, pout.filtered.sets);
    stages["stability"] = {{"n_records", sout.records.size()},
                           {"n_excluded", sout.n_excluded},
                           {"n_destinations", sout.destinations.size()}};
    log("stability: " + std::to_string(sout.records.size()) + " records");

    const auto metrics = stage_metrics(cfg, net);
    stages["metrics"] = {{"avg_street_length_m", metrics.avg_street_length_m},
                         {"std_street_length_m", metrics.std_street_length_m},
                         {"avg_circuity", metrics.avg_circuity},
                         {"bearing_entropy", metrics.bearing_entropy},
                         {"intersection_density", metrics.intersection_density_per_km2},
                         {"road_density", metrics.road_density_km_per_km2},
                         {"total_road_length_km", metrics.total_road_length_km}};
    log("metrics: entropy " + csv::format_double(metrics.bearing_entropy));

    const auto aout = stage_analyze(cfg, sout.records, pout.filtered.threshold_ratio);
    stages["analyze"] = {
        {"n_radii", aout.summary.median_by_radius_km.size()},
        {"median_stability", aout.summary.stability.median},
        {"fit", aout.fit ? ordered_json({{"a", aout.fit->a},
                                         {"b", aout.fit->b},
                                         {"c", aout.fit->c},
                                         {"r_squared", aout.fit->r_squared},
                                         {"degenerate", aout.fit->degenerate}})
                         : ordered_json(nullptr)}};
    log("analyze: median stability " + csv::format_double(aout.summary.stability.median));

    manifest["stages"] = stages;

    std::vector<std::string> names{"nodes.csv",
                                   "edges.csv",
                                   "od_pairs.csv",
                                   "perturbations.csv",
                                   "filtered_perturbations.csv",
                                   "filter.json",
                                   "od_records.csv",
                                   "destination_stability.csv",
                                   "metrics.csv",
                                   "radius_medians.csv",
                                   "summary.json",
                                   "fit_report.csv"};
    std::sort(names.begin(), names.end());
    auto outputs = ordered_json::object();
    guarded("manifest", [&] {
        char hex[17];
        for (const auto& name : names) {
            const std::string path = join_path(cfg.out_dir, name);
            if (!fs::exists(path)) continue;
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(fnv1a64(read_file_bytes(path))));
            outputs[name] = std::string("fnv1a64:") + hex;
        }
        manifest["outputs"] = outputs;
        write_text_file(join_path(cfg.out_dir, "manifest.json"), manifest.dump(2) + "\n");
        return 0;
    });
    log("manifest: " + std::to_string(outputs.size()) + " outputs hashed");
}

}  // namespace pathstab
