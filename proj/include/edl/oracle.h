// Copyright 2026 The edlake Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "edl/planner.h"
#include "edl/table.h"

namespace edl::oracle {

/// Plaintext reference semantics. NULL equals only NULL, `<>`/NOT IN hold
/// for NULL unless NULL is listed, and range comparisons never hold for NULL.
bool eval_where(const planner::Expr& where, const Row& row);

/// Rows of `rows` (in order) whose WHERE holds, projected. Evaluates the
/// parsed tree directly; no rewrite passes run.
std::vector<Row> eval_ast(const planner::ViewFamilyAst& ast, const std::vector<Row>& rows);
std::vector<Row> eval_view(std::string_view sql, const Schema& schema,
                           const std::vector<Row>& rows);

/// Reference g_j evaluation, written against the integer model of each atom.
Bytes eval_predicate(const planner::PredicateFn& pred, const Schema& schema, const Row& row);

/// Rows matching the canonical view (some j with g_j(row) in X^j), projected.
std::vector<Row> eval_canonical(const planner::CanonicalFamily& family,
                                const planner::CanonicalView& view, const Schema& schema,
                                const std::vector<Row>& rows);

}  // namespace edl::oracle
