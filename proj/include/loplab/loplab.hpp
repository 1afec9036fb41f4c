#pragma once

#include "loplab/em.hpp"
#include "loplab/error.hpp"
#include "loplab/journal.hpp"
#include "loplab/json_io.hpp"
#include "loplab/linalg.hpp"
#include "loplab/llsm.hpp"
#include "loplab/lop.hpp"
#include "loplab/pcm.hpp"
#include "loplab/search.hpp"
#include "loplab/text_io.hpp"
