#ifndef KIDLEX_KIDLEX_HPP
#define KIDLEX_KIDLEX_HPP

// Library umbrella; the command-line front end lives in kidlex/cli.hpp.
#include "kidlex/util.hpp"
#include "kidlex/textproc.hpp"
#include "kidlex/lexicon.hpp"
#include "kidlex/readability.hpp"
#include "kidlex/audit.hpp"
#include "kidlex/charts.hpp"
#include "kidlex/targetwords.hpp"
#include "kidlex/genclient.hpp"
#include "kidlex/simplify.hpp"
#include "kidlex/evalharness.hpp"
#include "kidlex/annotate.hpp"
#include "kidlex/annotate_server.hpp"

#endif  // KIDLEX_KIDLEX_HPP
