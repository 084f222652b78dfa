#pragma once

// Persistence: checkpoints, track files, run configs and CSV reports.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtl/experiments.hpp"
#include "gtl/geometry.hpp"
#include "gtl/network.hpp"

namespace gtl {

inline constexpr int kSchemaVersion = 1;

// JSON text with every floating-point number printed at 17 significant
// digits (NaN and infinities become null). Keys keep their sorted order.
std::string dump_json(const nlohmann::json& j);

// Writes to path + ".tmp" and renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file_bytes(const std::string& path);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
// FNV-1a over the little-endian bytes of every weight, in weights() order.
std::uint64_t model_checksum(const Network& net);

// ---------------------------------------------------------------- checkpoints

struct Checkpoint {
    Architecture arch;
    std::uint64_t seed = 0;
    Network model;
};

nlohmann::json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
// Throws FormatError on a malformed document, wrong shapes or a checksum
// that does not match the weights.
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------- tracks

// Binary layout, little-endian: "GTLTRK01", u32 version, u32 stage_id,
// u64 n_tracks, u64 n_states, u64 dim, u64 model_checksum,
// u64 body_checksum, then n_tracks * n_states * dim float64 values.
struct TrackFile {
    std::uint32_t stage_id = 0;
    std::uint64_t model_checksum = 0;
    std::vector<Track> tracks;
};

inline constexpr std::size_t kTrackHeaderBytes = 56;

std::string encode_tracks(const TrackFile& file);
TrackFile decode_tracks(const std::string& bytes);
void save_tracks(const std::string& path, const TrackFile& file);
TrackFile load_tracks(const std::string& path);

// ---------------------------------------------------------------- config

struct OutputSpec {
    std::string dir = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    DatasetSpec dataset;
    // input_dim and output_dim are filled in once the dataset is known.
    Architecture arch;
    TrainConfig train;
    std::vector<double> gammas;
    std::vector<ArchType> sweep_archs;
    OutputSpec output;
};

// Enforces the rules of schemas/run_config.schema.json. Relative dataset paths
// are resolved against base_dir. Throws ConfigError naming the field path.
RunConfig parse_run_config(const nlohmann::json& j, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// ---------------------------------------------------------------- reports

std::string format_double(double v);

std::string train_log_csv(const TrainLog& log, std::size_t n_stages);
std::string sweep_csv(const SweepReport& report);
std::string robustness_csv(const RobustnessReport& report);

struct StageReport {
    StageMetrics metrics;
    double theorem1_fraction = 0.0;
};

struct MetricsReport {
    bool lss = true;
    bool ots = true;
    bool w2 = true;
    bool theorem1 = true;
    std::vector<StageReport> stages;
};

std::string metrics_csv(const MetricsReport& report);
nlohmann::json metrics_json(const MetricsReport& report);

}  // namespace gtl
