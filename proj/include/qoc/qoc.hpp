#pragma once

#include "qoc/descent.hpp"
#include "qoc/model.hpp"
#include "qoc/numeric.hpp"
#include "qoc/pontryagin.hpp"
#include "qoc/protocol.hpp"
#include "qoc/protocol_io.hpp"
#include "qoc/qsl.hpp"
#include "qoc/run.hpp"
