// Copyright 2026 The facefeat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef FACEFEAT_FACEFEAT_HPP
#define FACEFEAT_FACEFEAT_HPP

#include "facefeat/classifier.hpp"
#include "facefeat/config.hpp"
#include "facefeat/container.hpp"
#include "facefeat/dataset.hpp"
#include "facefeat/dictionary.hpp"
#include "facefeat/encoders.hpp"
#include "facefeat/error.hpp"
#include "facefeat/harness.hpp"
#include "facefeat/image.hpp"
#include "facefeat/lbp.hpp"
#include "facefeat/parallel.hpp"
#include "facefeat/pipeline.hpp"
#include "facefeat/pooling.hpp"
#include "facefeat/preprocess.hpp"
#include "facefeat/random.hpp"
#include "facefeat/report.hpp"
#include "facefeat/sparse.hpp"
#include "facefeat/synthetic.hpp"

#endif  // FACEFEAT_FACEFEAT_HPP
