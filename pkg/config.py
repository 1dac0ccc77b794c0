"""
Zentrale Konstanten für Streaming-PCA und Experimente
"""

import os

# Obergrenze für Orakel, die p×p-Matrizen bilden (Batch-PCA, Populationskovarianz, Diagnosen)
ORACLE_MAX_DIM = 5000

# Konstanten der Schedules theorem1/theorem2 (c_B empirisch getunt, c_T neutral)
DEFAULT_C_B = 0.2
DEFAULT_C_T = 1.0

# Experimente
DEFAULT_TRIALS = 200
DEFAULT_SEED = 0
SCALING_GRID_FACTOR = 1.3
SCALING_N_MIN = 16
SCALING_N_CAP = 2_000_000

# Lese- und Erzeugungspuffer in Zahlen; Trainer lesen mindestens k·m Zeilen am Stück
CHUNK_BUFFER_NUMBERS = 1 << 16

# CSV-Ausgabe
CSV_FLOAT_FORMAT = "%.12g"

# Threads für parallele Trials
THREADS_ENV = "SPCA_THREADS"

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def thread_count() -> int:
    """Liest die Thread-Anzahl aus der Umgebung (Standard: 1)"""
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)
