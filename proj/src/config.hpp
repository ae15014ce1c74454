#ifndef LEVYLAB_SRC_CONFIG_HPP
#define LEVYLAB_SRC_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace levylab {

enum class ParamType { integer, real, text, real_list, integer_list, boolean };

const char* param_type_name(ParamType t) noexcept;

struct ParamDef {
    std::string name;
    ParamType type;
    std::string default_value;
    std::string help;
    std::vector<std::string> choices;
};

struct CommandDef {
    std::string name;
    std::string help;
    std::vector<ParamDef> params;
};

const std::vector<CommandDef>& command_table();
const std::vector<ParamDef>& run_params();
const CommandDef& find_command(const std::string& name);
// JSON description of every subcommand, run option and default.
std::string schema_json();

// Resolved experiment configuration: [run] options plus subcommand parameters.
class ExperimentConfig {
public:
    explicit ExperimentConfig(const std::string& subcommand);

    const std::string& subcommand() const noexcept { return def_->name; }

    // Accepts "key", "run.key", "params.key" or "<subcommand>.key".
    void set(const std::string& key, const std::string& value);
    void load_ini(const std::string& text, const std::string& origin);
    void load_file(const std::string& path);
    std::string get(const std::string& key) const;

    std::int64_t integer(const std::string& key) const;
    double real(const std::string& key) const;
    bool boolean(const std::string& key) const;
    std::string text(const std::string& key) const { return get(key); }
    std::vector<double> reals(const std::string& key) const;
    std::vector<std::int64_t> integers(const std::string& key) const;

    std::vector<std::uint64_t> seeds() const;
    std::size_t replications() const;
    std::size_t workers() const;
    std::string output_dir() const;

    std::string resolved_ini() const;

private:
    const ParamDef& lookup(const std::string& section, const std::string& key, bool& is_run) const;

    const CommandDef* def_;
    std::map<std::string, std::string> run_;
    std::map<std::string, std::string> params_;
};

}  // namespace levylab

#endif
