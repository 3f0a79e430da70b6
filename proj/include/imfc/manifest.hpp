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

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace imfc {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Append-only record of one CLI run: the command, a full config snapshot,
/// input digests and output paths, enough to replay the run bit-exactly.
struct RunManifest {
    std::string command;
    std::string config_json;  // serialized config snapshot
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;
    double duration_s = 0.0;
};

/// Append one JSON line to <out_dir>/manifest.jsonl.
void append_manifest(const std::string& out_dir, const RunManifest& m);

}  // namespace imfc
