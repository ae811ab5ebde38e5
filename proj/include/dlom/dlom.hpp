#pragma once

// Everything except the HTTP service (dlom/service.hpp), which pulls in
// cpp-httplib.

#include "dlom/decision.hpp"
#include "dlom/device_xml.hpp"
#include "dlom/error.hpp"
#include "dlom/metrics.hpp"
#include "dlom/query.hpp"
#include "dlom/record_json.hpp"
#include "dlom/repository.hpp"
#include "dlom/schema.hpp"
#include "dlom/session.hpp"
#include "dlom/synthesis.hpp"
#include "dlom/triples.hpp"
