#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "streamsift/config.hpp"
#include "streamsift/model.hpp"

namespace streamsift::cli {

enum ExitCode : int { kOk = 0, kRuntimeError = 1, kConfigError = 2, kAllSeedsFailed = 3 };

/// Value of STREAMSIFT_SEED when set and numeric.
std::optional<std::uint64_t> env_seed();

struct RunFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::size_t workers = 1;
};
int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err);

struct DemoFlags {
    std::size_t resolution = 64;
    std::string output = "demo";
    std::uint64_t seed = 0;
    std::size_t targets = 256;
    std::size_t workers = 1;
};
int cmd_demo(const DemoFlags& flags, std::ostream& out, std::ostream& err);

struct ScoreFlags {
    std::string model_path;
    std::string store_path;       // labelled CSV, label last; optional
    std::string candidates_path;  // labelled CSV, label last
    std::string targets_path;     // feature-only CSV; needed by epig and la_epig
    std::string aux_store_path;   // labelled CSV for the rho_loss auxiliary model
    std::string objective = "epig";
    double eta = 1.0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};
/// Prints "index,score,rank" followed by one line per candidate in input order.
int cmd_score(const ScoreFlags& flags, std::ostream& out, std::ostream& err);

struct StreamFlags {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output = "stream";
};
/// Writes step_<t>.csv for the first configured seed.
int cmd_stream(const StreamFlags& flags, std::ostream& out, std::ostream& err);

/// Model description for `score`: a forest/mlp/dirichlet spec in the run-config vocabulary, or
/// an explicit finite hypothesis table. `data` sizes the input space and the class count.
std::unique_ptr<Model> model_from_json(const Json& spec, const Dataset& data, std::uint64_t seed);

/// Parses argv and dispatches to a subcommand.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace streamsift::cli
