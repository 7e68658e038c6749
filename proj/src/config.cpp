#include "overcrit/config.hpp"

#include "overcrit/errors.hpp"

#include <fstream>
#include <sstream>

namespace overcrit {

RunConfig parse_config(const std::string& text)
{
    const nlohmann::json j = nlohmann::json::parse(text);
    require(j.is_object(), ErrorCode::invalid_argument, "configuration must be a JSON object");
    for (const auto& [key, value] : j.items())
        require(key == "model" || key == "profile" || key == "evolution" || key == "sweep",
            ErrorCode::invalid_argument, "unknown configuration section '" + key + "'");

    RunConfig c;
    if (j.contains("model"))
        c.model = j.at("model").get<TwoBandModel>();
    if (j.contains("profile"))
        c.profile = j.at("profile").get<BumpProfile>();
    if (j.contains("evolution"))
        c.evolution = j.at("evolution").get<EvolutionConfig>();
    c.sweep.model = c.model;
    c.sweep.profile = c.profile;
    c.sweep.evolution = c.evolution;
    if (j.contains("sweep"))
        from_json(j.at("sweep"), c.sweep);
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    require(in.good(), ErrorCode::io_failure, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::json to_json(const RunConfig& c)
{
    return {
        { "model", c.model },
        { "profile", c.profile },
        { "evolution", c.evolution },
        { "sweep", c.sweep },
    };
}

} // namespace overcrit
