// Copyright 2026 The pscp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#ifndef PSCP_DUMP_HPP
#define PSCP_DUMP_HPP

#include <string>

#include "pscp/flow.hpp"
#include "pscp/vae.hpp"

namespace pscp {

// Parameter dump: magic "PSCP", version u32, then one record per tensor
// (name-length u32, name bytes, rank u32, dims u32..., f64 LE payload).
// A leading "meta" record encodes the model kind and hyperparameters so
// a loader can refuse mismatched models.

enum class DumpKind { kFlow, kVae };

DumpKind peek_dump_kind(const std::string& path);

void save_flow(const std::string& path, const FlowModel& model);
FlowModel load_flow(const std::string& path);

void save_vae(const std::string& path, const VaeModel& model);
VaeModel load_vae(const std::string& path);

}  // namespace pscp

#endif  // PSCP_DUMP_HPP
