/*
 * Copyright 2026 The imfc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "imfc/manifest.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace imfc {

void append_manifest(const std::string& out_dir, const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["version"] = kToolkitVersion;
    j["command"] = m.command;
    j["config"] = nlohmann::json::parse(m.config_json.empty() ? "{}" : m.config_json);
    j["inputs"] = nlohmann::json::array();
    for (const auto& [path, digest] : m.inputs)
        j["inputs"].push_back({{"path", path}, {"digest", digest}});
    j["outputs"] = m.outputs;
    j["duration_s"] = m.duration_s;

    const std::string path = out_dir + "/manifest.jsonl";
    std::ofstream f(path, std::ios::app);
    if (!f) throw std::runtime_error("cannot append manifest " + path);
    f << j.dump() << '\n';
}

}  // namespace imfc
