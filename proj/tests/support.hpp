#pragma once

#include <filesystem>
#include <string>

#include "ccfsense/ccfsense.hpp"

namespace testsupport {

inline ccfsense::config::Document preset(const std::string& name) {
    using namespace ccfsense::config;
    return parse_document(read_json_file(preset_path(name, CCFSENSE_PRESET_DIR)));
}

inline nlohmann::json preset_json(const std::string& name) {
    using namespace ccfsense::config;
    return read_json_file(preset_path(name, CCFSENSE_PRESET_DIR));
}

inline std::filesystem::path tmp_dir() {
    std::filesystem::path p(CCFSENSE_TEST_TMP);
    std::filesystem::create_directories(p);
    return p;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testsupport
