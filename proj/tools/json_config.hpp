#pragma once

// CLI11 config formatter for JSON documents. Top-level keys are long option
// names of the main command; a nested object holds the options of the
// subcommand with that name. Arrays become multi-value inputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace dtwar::cli {

class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        return dump(app, default_also).dump(2) + "\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(input);
        } catch (const nlohmann::json::exception& e) {
            throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw CLI::ConversionError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        collect(doc, {}, items);
        return items;
    }

private:
    static std::string scalar(const nlohmann::json& v, const std::string& key) {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number()) return v.dump();
        throw CLI::ConversionError("config key '" + key + "' must hold a string, number or boolean");
    }

    static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                        std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, value] : obj.items()) {
            if (value.is_null()) continue;
            if (value.is_object()) {
                auto sub = parents;
                sub.push_back(key);
                collect(value, sub, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) item.inputs.push_back(scalar(v, key));
            } else {
                item.inputs.push_back(scalar(value, key));
            }
            out.push_back(std::move(item));
        }
    }

    static nlohmann::json dump(const CLI::App* app, bool default_also) {
        nlohmann::json j = nlohmann::json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
            std::vector<std::string> values = opt->results();
            if (values.empty() && default_also && !opt->get_default_str().empty()) {
                values.push_back(opt->get_default_str());
            }
            if (values.empty()) continue;
            const auto& name = opt->get_lnames().front();
            if (values.size() == 1) {
                j[name] = values.front();
            } else {
                j[name] = values;
            }
        }
        for (const CLI::App* sub : app->get_subcommands({})) {
            auto inner = dump(sub, default_also);
            if (!inner.empty()) j[sub->get_name()] = inner;
        }
        return j;
    }
};

}  // namespace dtwar::cli
