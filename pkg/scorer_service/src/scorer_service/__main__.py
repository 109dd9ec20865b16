"""Run the scorer service: ``python3 -m scorer_service``.

SCORER_MODEL_PATH selects the checkpoint (default: the shipped one);
SCORER_PORT and SCORER_HOST select the bind address.
"""

import os

import uvicorn

from .service import create_app


def main() -> None:
    uvicorn.run(
        create_app(),
        host=os.environ.get("SCORER_HOST", "127.0.0.1"),
        port=int(os.environ.get("SCORER_PORT", "8301")),
    )


if __name__ == "__main__":
    main()
