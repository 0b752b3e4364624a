/*
 * Copyright 2026 The simcmc Authors
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

#include <cassert>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "simcmc/errors.hpp"

namespace simcmc {

/**
 * An immutable path x_{1:n} stored as a shared prefix plus its last block.
 *
 * Paths built with extend() are complete: every block is reachable. Paths
 * built with marginal() only know their last block and their length; asking
 * them for anything earlier throws mode_mismatch. Both kinds go through the
 * same interface so models written against (prefix, last) work with either
 * storage mode.
 */
template <class Block>
class path {
 public:
  using block_type = Block;
  using pointer = std::shared_ptr<const path>;

  /// The empty path (length 0), used as the prefix at level 1.
  path() = default;

  static path extend(pointer prefix, Block last) {
    const std::size_t len = prefix ? prefix->length_ + 1 : 1;
    if (prefix && !prefix->complete()) {
      throw mode_mismatch("cannot extend a marginal-only path");
    }
    return path(std::move(prefix), std::move(last), len, true);
  }

  static path marginal(Block last, std::size_t length) {
    assert(length >= 1);
    return path(nullptr, std::move(last), length, length == 1);
  }

  static pointer make(pointer prefix, Block last) {
    return std::make_shared<const path>(extend(std::move(prefix), std::move(last)));
  }

  /// Builds a complete path from its blocks.
  static pointer from_blocks(const std::vector<Block>& blocks) {
    pointer p;
    for (const auto& b : blocks) p = make(std::move(p), b);
    return p;
  }

  std::size_t length() const { return length_; }
  bool empty() const { return length_ == 0; }
  bool complete() const { return complete_; }

  const Block& last() const {
    if (empty()) throw mode_mismatch("empty path has no last block");
    return *last_;
  }

  /// Length-(n-1) prefix. The empty path for length-1 paths.
  const path& prefix() const {
    if (length_ <= 1) return empty_path();
    if (!prefix_) throw mode_mismatch("prefix not stored in marginal-only mode");
    return *prefix_;
  }

  const pointer& prefix_pointer() const { return prefix_; }

  /// Block k, 1-based as in x_k.
  const Block& operator[](std::size_t k) const {
    if (k == 0 || k > length_) throw mode_mismatch("block index out of range");
    const path* p = this;
    while (p->length_ > k) {
      if (!p->prefix_) throw mode_mismatch("block not stored in marginal-only mode");
      p = p->prefix_.get();
    }
    return *p->last_;
  }

  std::vector<Block> blocks() const {
    std::vector<Block> out(length_);
    const path* p = this;
    for (std::size_t k = length_; k > 0; --k) {
      if (!p) throw mode_mismatch("path is not complete");
      out[k - 1] = *p->last_;
      p = p->prefix_.get();
    }
    return out;
  }

  static const path& empty_path() {
    static const path e;
    return e;
  }

 private:
  path(pointer prefix, Block last, std::size_t length, bool complete)
      : prefix_(std::move(prefix)), last_(std::move(last)), length_(length),
        complete_(complete) {}

  pointer prefix_;
  std::optional<Block> last_;
  std::size_t length_ = 0;
  bool complete_ = true;
};

/// Every prefix of a complete path: result[n-1] is x_{1:n}. Used for the
/// nested initialization x_n^(0) = (x_{n-1}^(0), x_n^(0)).
template <class Block>
std::vector<typename path<Block>::pointer> nested_prefixes(
    const typename path<Block>::pointer& full) {
  std::vector<typename path<Block>::pointer> out(full ? full->length() : 0);
  auto p = full;
  for (std::size_t k = out.size(); k > 0; --k) {
    out[k - 1] = p;
    p = p->prefix_pointer();
  }
  return out;
}

}  // namespace simcmc
