#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathstab/analysis.hpp"
#include "pathstab/geojson.hpp"
#include "pathstab/metrics.hpp"
#include "pathstab/perturbation.hpp"
#include "pathstab/sampling.hpp"
#include "pathstab/stability.hpp"

namespace pathstab {

/// Resolved pipeline configuration. File inputs are either the canonical
/// node/edge CSV pair or a GraphML document; an explicit OD list bypasses
/// radial sampling.
struct PipelineConfig {
    std::string city = "city";
    std::string nodes_csv;
    std::string edges_csv;
    std::string graphml;
    std::string od_pairs_csv;
    std::optional<double> area_km2;
    std::optional<double> center_lat;
    std::optional<double> center_lon;
    double r_min_km = 1.0;
    double r_max_km = 30.0;
    double r_step_km = 1.0;
    std::size_t n_points = 36;
    double match_threshold_m = 500.0;
    PerturbationConfig perturbation;
    std::optional<double> abs_ratio_threshold;  // fixed filter threshold instead of percentile
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    SamplingConfig sampling_config() const;  // throws when center is unset
};

/// Plain key=value document; '#' lines are comments, unknown keys are errors.
PipelineConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
PipelineConfig parse_config_file(const std::string& path);

/// Applies one key=value assignment (shared by config files and CLI flags).
void apply_config_entry(PipelineConfig& cfg, std::string_view key, std::string_view value,
                        const std::string& where);

class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Intermediate table (de)serialization, shared by staged subcommands.
void write_od_pairs_csv(const std::string& path, const RoadNetwork& net,
                        std::span<const ODPair> pairs);
std::vector<ODPair> read_od_pairs_csv(const std::string& path, const RoadNetwork& net);
void write_perturbations_csv(const std::string& path, const RoadNetwork& net,
                             std::span<const PerturbationSet> sets);
std::vector<PerturbationSet> read_perturbations_csv(const std::string& path,
                                                    const RoadNetwork& net);
void write_od_records_csv(const std::string& path, const RoadNetwork& net,
                          std::span<const StabilityRecord> records);
/// Partial reconstruction: azimuths, jaccard lists and deviation length lists
/// are not stored in the CSV and come back empty.
std::vector<StabilityRecord> read_od_records_csv(const std::string& path, const RoadNetwork& net);
void write_destination_csv(const std::string& path, const RoadNetwork& net,
                           std::span<const DestinationStability> destinations);
std::vector<MapPoint> read_destination_csv(const std::string& path);

// Stage entry points. Each writes its intermediates into cfg.out_dir and
// throws StageError on failure.
RoadNetwork stage_ingest(const PipelineConfig& cfg);

std::vector<ODPair> stage_sample(const PipelineConfig& cfg, const RoadNetwork& net);

struct PerturbOutputs {
    FilterResult filtered;
    std::size_t n_destinations = 0;
    std::size_t n_entries = 0;      // before filtering
    std::size_t n_unreachable = 0;  // before filtering
    bool percentile_mode = true;
};
PerturbOutputs stage_perturb(const PipelineConfig& cfg, const RoadNetwork& net,
                             std::span<const ODPair> pairs);

struct StabilityOutputs {
    std::vector<StabilityRecord> records;
    std::vector<DestinationStability> destinations;
    std::size_t n_excluded = 0;  // OD pairs with no usable perturbed paths
};
StabilityOutputs stage_stability(const PipelineConfig& cfg, const RoadNetwork& net,
                                 std::span<const ODPair> pairs,
                                 std::span<const PerturbationSet> filtered_sets);

CityMetrics stage_metrics(const PipelineConfig& cfg, const RoadNetwork& net);

struct AnalyzeOutputs {
    CitySummary summary;
    std::optional<ExpFit> fit;  // absent with fewer than 4 distinct radii
};
AnalyzeOutputs stage_analyze(const PipelineConfig& cfg, std::span<const StabilityRecord> records,
                             std::optional<double> filter_threshold);

/// Full chain ingest -> sample -> perturb -> filter -> stability -> metrics
/// -> analyze, then writes manifest.json with per-stage counts and FNV-1a
/// hashes of every output file. Progress lines go to `progress` when given.
void run_pipeline(const PipelineConfig& cfg, std::ostream* progress = nullptr);

/// FNV-1a 64-bit hash, used for the manifest's output digests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace pathstab
