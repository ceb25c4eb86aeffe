#ifndef FLOWLAB_CLI_HPP
#define FLOWLAB_CLI_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowlab {

/// Command line or config file problem: exit status 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    nlohmann::json params; // fully defaulted, schema-validated tree
    std::uint64_t seed = 1;
    std::string output_dir = ".";
    unsigned workers = 1;
    bool emit_config_only = false;

    nlohmann::json to_json() const;
    bool operator==(const RunConfig& other) const;
};

/// Parses `--config file.json` plus `--key value` overrides into a validated
/// RunConfig. Unknown keys, duplicate keys and type mismatches are rejected
/// with the offending path named.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs the configured command and writes its artifacts plus a manifest into
/// the output directory. Partial outputs are removed on failure.
int dispatch(const RunConfig& config);

int cli_main(int argc, char** argv);

/// JSON parse that rejects duplicate object keys (nlohmann's default parser
/// silently keeps the last one).
nlohmann::json parse_json_strict(const std::string& text);

std::uint64_t fnv1a64(const std::string& data);

std::string usage_text();
std::string command_help(const std::string& command);

} // namespace flowlab

#endif
